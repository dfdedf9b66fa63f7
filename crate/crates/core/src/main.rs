fn main() {
    std::process::exit(kdvcurves::cli::run(std::env::args_os()));
}
