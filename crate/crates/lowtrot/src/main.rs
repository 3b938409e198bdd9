use lowtrot::cli;

fn main() {
    std::process::exit(cli::run());
}
