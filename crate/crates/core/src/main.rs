fn main() -> std::process::ExitCode {
    hyperladder::cli::main()
}
