//! Entry point of the `ftl` binary.

fn main() {
    std::process::exit(ftl_core::cli::run(std::env::args_os()));
}
