//! Regenerates the JSON fixtures under `fixtures/` from the built-in frames.

use std::path::PathBuf;

use nahodge::frames;
use nahodge::io::FrameFile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("fixtures"));
    std::fs::create_dir_all(&dir)?;
    let p4 = frames::projective_four_correlators();
    let list = [
        ("cubic.frame", FrameFile::from_frame(&frames::cubic_fourfold()?, None)),
        ("k3.frame", FrameFile::from_frame(&frames::k3_surface()?, None)),
        ("abelian.frame", FrameFile::from_frame(&frames::abelian_surface()?, None)),
        ("p4.frame", FrameFile::from_frame(&frames::projective_four()?, Some(&p4))),
        ("point.frame", FrameFile::from_frame(&frames::point()?, None)),
    ];
    for (name, file) in list {
        std::fs::write(dir.join(name), serde_json::to_string_pretty(&file)? + "\n")?;
        println!("{name}: {:?}", file.labels.iter().take(6).collect::<Vec<_>>());
    }
    Ok(())
}
