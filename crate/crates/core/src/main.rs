fn main() {
    std::process::exit(lattice_smooth::cli::cli_main(std::env::args_os()));
}
