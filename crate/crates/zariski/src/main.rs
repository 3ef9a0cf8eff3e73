fn main() {
    std::process::exit(zariski::run(std::env::args_os()));
}
