fn main() -> std::process::ExitCode {
    outreg_harness::cli::main()
}
