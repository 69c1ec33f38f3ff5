fn main() -> std::process::ExitCode {
    patterned_rmt::cli::main()
}
