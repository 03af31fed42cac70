use std::path::PathBuf;

#[test]
fn acceptance() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let lines = ddgl2_criteria::evaluate(&dir);
    for l in &lines {
        println!("{l}");
    }
    let failed: Vec<String> = lines.iter().filter(|l| !l.pass).map(|l| l.n.to_string()).collect();
    println!("acceptance: {}/{} criteria pass", lines.len() - failed.len(), lines.len());
    assert!(failed.is_empty(), "criteria failing on the printed corpus: {}", failed.join(", "));
}
