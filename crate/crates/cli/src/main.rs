fn main() {
    println!("sandpile");
}
