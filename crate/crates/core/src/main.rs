fn main() {
    std::process::exit(helicoidal::cli::run(std::env::args_os()));
}
