fn main() {
    std::process::exit(levy_spde::cli::main());
}
