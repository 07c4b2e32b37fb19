fn main() {
    std::process::exit(mknf_aft::cli::run(std::env::args_os()));
}
