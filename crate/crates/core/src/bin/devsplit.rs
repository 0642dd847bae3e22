fn main() -> std::process::ExitCode {
    devsplit::cli::run_from_args(std::env::args_os())
}
