fn main() {
    std::process::exit(seqae::cli::main_exit_code());
}
