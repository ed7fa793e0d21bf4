fn main() {
    std::process::exit(caputo_series::cli::main_with(std::env::args_os()));
}
