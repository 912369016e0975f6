fn main() {
    std::process::exit(qaoalab::cli::main());
}
