//! Writes the built-in example maps as JSON files for use with the CLI.
//!
//! Usage: cargo run --example fixtures -- <output-dir>

use uniformize::io;
use uniformize::shapes;

fn main() {
    let dir = std::env::args_os().nth(1).unwrap_or_else(|| {
        eprintln!("usage: fixtures <output-dir>");
        std::process::exit(2);
    });
    let dir = std::path::PathBuf::from(dir);
    std::fs::create_dir_all(&dir).expect("output directory");
    let fixtures = [
        ("tetrahedron.json", shapes::weighted_tetrahedron()),
        ("cube.json", shapes::weighted_cube()),
        ("square_torus.json", shapes::weighted_square_torus()),
        ("genus_two.json", shapes::weighted_genus_two()),
        (
            "truncated_tetrahedron.json",
            shapes::weighted_truncated_tetrahedron(),
        ),
    ];
    for (name, weighted) in fixtures {
        let path = dir.join(name);
        io::write_map(&path, &weighted).expect("fixture written");
        println!("wrote {}", path.display());
    }
}
