use clap::Parser;

fn main() {
    let args = conic_uot::cli::Args::parse();
    std::process::exit(conic_uot::cli::main_with_args(args));
}
