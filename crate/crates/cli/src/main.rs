fn main() {
    println!("pmc");
}
