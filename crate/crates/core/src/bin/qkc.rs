fn main() {
    std::process::exit(qk::cli::main_from_env());
}
