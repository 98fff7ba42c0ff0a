fn main() {
    std::process::exit(morpion_r2::cli::main());
}
