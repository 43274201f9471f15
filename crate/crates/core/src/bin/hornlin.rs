fn main() -> std::process::ExitCode {
    hornlin::cli::run(std::env::args_os())
}
