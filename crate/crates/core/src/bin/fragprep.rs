fn main() {
    std::process::exit(fragprep::cli::run_from_args(std::env::args_os()));
}
