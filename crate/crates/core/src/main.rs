fn main() {
    std::process::exit(tf_corner::cli::run(std::env::args_os()));
}
