fn main() {
    std::process::exit(contactlab::cli::main())
}
