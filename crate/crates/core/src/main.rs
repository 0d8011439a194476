fn main() {
    std::process::exit(olive_sim::cli::cli_main(std::env::args_os()));
}
