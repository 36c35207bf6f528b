fn main() {
    std::process::exit(kdecluster_cli::main_with_args(std::env::args_os()));
}
