fn main() -> std::process::ExitCode {
    ppvf_core::cli::main()
}
