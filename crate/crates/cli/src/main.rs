fn main() {
    std::process::exit(msbench::run(std::env::args_os()));
}
