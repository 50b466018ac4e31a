fn main() {
    std::process::exit(mockalpha::run(std::env::args_os()));
}
