fn main() {
    std::process::exit(fanin::cli::main_with_std());
}
