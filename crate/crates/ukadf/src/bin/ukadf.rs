fn main() {
    ukadf::cli::main_exit()
}
