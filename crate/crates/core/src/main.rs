fn main() {
    std::process::exit(mixv::cli::main());
}
