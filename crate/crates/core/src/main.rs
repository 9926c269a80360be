fn main() {
    std::process::exit(lattice_vis::cli::main_with_args(std::env::args_os()));
}
