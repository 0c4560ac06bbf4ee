fn main() {
    std::process::exit(divisim::cli::main());
}
