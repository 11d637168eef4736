//! Binary entry point; all behavior lives in [`qrabi::cli`].

fn main() {
    std::process::exit(qrabi::cli::run());
}
