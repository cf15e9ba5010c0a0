fn main() {
    std::process::exit(merit_dynamics::cli::main());
}
