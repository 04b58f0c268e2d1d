fn main() {
    std::process::exit(ghz_dfs::cli::main_with_args(std::env::args_os()));
}
