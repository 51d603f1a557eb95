fn main() {
    std::process::exit(twchoose::cli::run(std::env::args_os()));
}
