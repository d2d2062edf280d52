fn main() {
    std::process::exit(viqds::cli::main());
}
