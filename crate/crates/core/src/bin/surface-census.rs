fn main() { std::process::exit(surface_census::cli::run(std::env::args_os())); }
