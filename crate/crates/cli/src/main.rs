fn main() {
    std::process::exit(stbranch_cli::run(std::env::args_os()));
}
