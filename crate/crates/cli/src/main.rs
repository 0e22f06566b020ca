fn main() {
    std::process::exit(stormbo::main_with_args(std::env::args_os()));
}
