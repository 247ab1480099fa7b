fn main() -> std::process::ExitCode {
    contactdyn::cli::main()
}
