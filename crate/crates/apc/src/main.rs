fn main() {
    eprintln!("apc: not yet wired");
    std::process::exit(2);
}
