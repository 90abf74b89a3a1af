fn main() -> std::process::ExitCode {
    nocurl::cli::run(std::env::args_os())
}
