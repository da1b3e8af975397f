fn main() -> std::process::ExitCode {
    paircc::cli::main()
}
