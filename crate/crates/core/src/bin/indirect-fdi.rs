fn main() {
    std::process::exit(indirect_fdi::cli::run(std::env::args_os()));
}
