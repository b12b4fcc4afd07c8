//! Prints the category file of a built-in to stdout:
//!
//! ```sh
//! cargo run -q --example export_category -- fib > fib.json
//! ```

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "fib".to_string());
    match tubecert::builtin::builtin_category(&name) {
        Ok(cat) => println!("{}", cat.to_file().to_json()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
