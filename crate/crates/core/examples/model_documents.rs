//! Reading and writing model documents.
//!
//! cargo run --example model_documents

use compartmental_entropy::entropy::EntropyReport;
use compartmental_entropy::io::ModelDocument;
use compartmental_entropy::zoo::emanuel;

const SERIAL: &str = r#"
schema_version = 1
label = "serial"
u = [1.0, 0.0]
B = [[-1.0,  0.0],
     [ 1.0, -1.0]]
"#;

const BUILTIN: &str = r#"
schema_version = 1
[builtin]
name = "table1"
params = { row = 7 }
"#;

fn main() -> compartmental_entropy::Result<()> {
    for text in [SERIAL, BUILTIN] {
        let sys = ModelDocument::parse(text)?.to_system()?;
        let r = EntropyReport::new(&sys)?;
        println!(
            "{:<12} H = {:.4}  theta = {:.4}",
            sys.label().unwrap_or("?"),
            r.path_entropy,
            r.rate_per_time
        );
    }
    println!("\n{}", ModelDocument::from_system(&emanuel(2.0)?).to_toml());
    Ok(())
}
