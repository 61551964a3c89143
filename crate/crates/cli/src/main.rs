fn main() {
    std::process::exit(fq_junta_cli::run(std::env::args_os()));
}
