fn main() {
    std::process::exit(dialect_bench::cli::run(std::env::args_os()));
}
