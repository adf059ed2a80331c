//! File formats: edge-list graphs, data CSV, shuffle maps, and report
//! rows.
//!
//! Graph files are plain text. The first line is `p <num_vars>`; every
//! following line is one edge, `<i> -> <j>` for a directed edge or
//! `<i> -- <j>` for an undirected one, with decimal variable indices.
//! Writers emit a canonical form — directed edges first, then
//! undirected, each ascending — so write → read → write is
//! byte-identical.
//!
//! Data CSV files have one header row naming the columns (`V0..V{p-1}`
//! when generated here) and one row per observation. Floats are written
//! in shortest round-trip form, so reading a file this module wrote
//! recovers the original values bit for bit.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use boss_core::{DataMatrix, Dag, Pdag};

use crate::CliError;

fn read_error(path: &Path, what: impl fmt::Display) -> CliError {
    CliError::Data(format!("{}: {what}", path.display()))
}

/// Reads a whole file, classifying failures as data errors.
fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| read_error(path, e))
}

/// Writes a whole file, classifying failures as data errors.
pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| read_error(path, e))
}

/// Canonical text form of a graph: directed edges ascending, then
/// undirected edges ascending.
pub fn graph_to_string(g: &Pdag) -> String {
    let mut out = String::new();
    writeln!(out, "p {}", g.num_vars()).expect("string write");
    for (u, v) in g.directed_edges() {
        writeln!(out, "{u} -> {v}").expect("string write");
    }
    for (u, v) in g.undirected_edges() {
        writeln!(out, "{u} -- {v}").expect("string write");
    }
    out
}

pub fn write_graph(path: &Path, g: &Pdag) -> Result<(), CliError> {
    write_file(path, &graph_to_string(g))
}

/// Parses the edge-list graph format. Edge order in the file is free;
/// duplicate or self edges are rejected.
pub fn read_graph(path: &Path) -> Result<Pdag, CliError> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| read_error(path, "empty graph file"))?;
    let num_vars = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["p", n] => n
            .parse::<usize>()
            .map_err(|_| read_error(path, format!("bad variable count {n:?}")))?,
        _ => {
            return Err(read_error(
                path,
                format!("first line must be `p <num_vars>`, got {header:?}"),
            ))
        }
    };
    let mut g = Pdag::new(num_vars);
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, op, b] = fields[..] else {
            return Err(read_error(
                path,
                format!("line {line_no}: expected `<i> -> <j>` or `<i> -- <j>`, got {line:?}"),
            ));
        };
        let parse = |s: &str| {
            s.parse::<usize>().ok().filter(|&v| v < num_vars).ok_or_else(|| {
                read_error(
                    path,
                    format!("line {line_no}: {s:?} is not a variable index below {num_vars}"),
                )
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        let result = match op {
            "->" => g.add_directed(a, b),
            "--" => g.add_undirected(a, b),
            _ => {
                return Err(read_error(
                    path,
                    format!("line {line_no}: unknown edge kind {op:?} (expected -> or --)"),
                ))
            }
        };
        result.map_err(|e| read_error(path, format!("line {line_no}: {e}")))?;
    }
    Ok(g)
}

/// Reads a graph that must be a DAG: directed edges only, acyclic.
pub fn read_dag(path: &Path) -> Result<Dag, CliError> {
    let g = read_graph(path)?;
    if !g.undirected_edges().is_empty() {
        return Err(read_error(
            path,
            "expected a fully directed acyclic graph, found undirected edges",
        ));
    }
    Dag::from_edges(g.num_vars(), &g.directed_edges())
        .map_err(|e| read_error(path, e))
}

/// Writes the data matrix as CSV with a `V0..V{p-1}` header. Values use
/// the shortest decimal form that parses back to the same float.
pub fn write_data_csv(path: &Path, data: &DataMatrix) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| read_error(path, e))?;
    let header: Vec<String> = (0..data.num_cols()).map(|c| format!("V{c}")).collect();
    w.write_record(&header).map_err(|e| read_error(path, e))?;
    let mut fields: Vec<String> = vec![String::new(); data.num_cols()];
    for r in 0..data.num_rows() {
        for (field, &x) in fields.iter_mut().zip(data.row(r)) {
            field.clear();
            write!(field, "{x}").expect("string write");
        }
        w.write_record(&fields).map_err(|e| read_error(path, e))?;
    }
    w.flush().map_err(|e| read_error(path, e))
}

/// Reads a data CSV (header row plus numeric rows, rectangular).
pub fn read_data_csv(path: &Path) -> Result<DataMatrix, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| read_error(path, e))?;
    let num_cols = r
        .headers()
        .map_err(|e| read_error(path, e))?
        .len();
    let mut values: Vec<f64> = Vec::new();
    let mut num_rows = 0usize;
    for (idx, record) in r.records().enumerate() {
        let record = record.map_err(|e| read_error(path, e))?;
        for (col, field) in record.iter().enumerate() {
            let x: f64 = field.trim().parse().map_err(|_| {
                read_error(
                    path,
                    format!(
                        "row {}, column {col}: {field:?} is not a number",
                        idx + 2
                    ),
                )
            })?;
            values.push(x);
        }
        num_rows += 1;
    }
    if num_rows == 0 {
        return Err(read_error(path, "no data rows"));
    }
    Ok(DataMatrix::from_values(num_rows, num_cols, values))
}

/// Rejects columns whose variance is zero: they carry no signal and
/// make the Gaussian score undefined.
pub fn reject_constant_columns(path: &Path, data: &DataMatrix) -> Result<(), CliError> {
    for c in 0..data.num_cols() {
        let col = data.column(c);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        if !(var > 0.0) {
            return Err(read_error(
                path,
                format!("column {c} is constant; its variance is zero"),
            ));
        }
    }
    Ok(())
}

/// Writes the column-shuffle map: entry `j` of `map` is where original
/// variable `j` ended up.
pub fn write_shuffle_csv(path: &Path, map: &[usize]) -> Result<(), CliError> {
    let mut out = String::from("orig_index,shuffled_index\n");
    for (orig, &shuffled) in map.iter().enumerate() {
        writeln!(out, "{orig},{shuffled}").expect("string write");
    }
    write_file(path, &out)
}

/// Reads a shuffle map and checks it is a permutation of `0..num_vars`.
pub fn read_shuffle_csv(path: &Path, num_vars: usize) -> Result<Vec<usize>, CliError> {
    let text = read_to_string(path)?;
    let mut map = vec![usize::MAX; num_vars];
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "orig_index,shuffled_index")) => {}
        other => {
            return Err(read_error(
                path,
                format!(
                    "expected header `orig_index,shuffled_index`, got {:?}",
                    other.map(|(_, l)| l)
                ),
            ))
        }
    }
    let mut seen = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || {
            read_error(
                path,
                format!("line {}: expected `<orig>,<shuffled>`, got {line:?}", idx + 1),
            )
        };
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        let orig: usize = a.trim().parse().map_err(|_| bad())?;
        let shuffled: usize = b.trim().parse().map_err(|_| bad())?;
        if orig >= num_vars || shuffled >= num_vars || map[orig] != usize::MAX {
            return Err(read_error(
                path,
                format!("line {}: map is not a permutation of 0..{num_vars}", idx + 1),
            ));
        }
        map[orig] = shuffled;
        seen += 1;
    }
    if seen != num_vars || {
        let mut hit = vec![false; num_vars];
        map.iter().any(|&s| std::mem::replace(&mut hit[s], true))
    } {
        return Err(read_error(
            path,
            format!("map is not a permutation of 0..{num_vars}"),
        ));
    }
    Ok(map)
}

/// Relabels a graph: variable `v` becomes `map[v]`.
pub fn relabel_graph(g: &Pdag, map: &[usize]) -> Pdag {
    let mut out = Pdag::new(g.num_vars());
    for (u, v) in g.directed_edges() {
        out.add_directed(map[u], map[v]).expect("valid relabeling");
    }
    for (u, v) in g.undirected_edges() {
        out.add_undirected(map[u], map[v]).expect("valid relabeling");
    }
    out
}

/// Inverse of a permutation map.
pub fn invert_map(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; map.len()];
    for (orig, &shuffled) in map.iter().enumerate() {
        inv[shuffled] = orig;
    }
    inv
}

/// Formats an optional ratio, using `NA` when it is undefined.
pub fn ratio_field(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v}"),
        None => "NA".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use boss_core::DataMatrix;

    #[test]
    fn graph_round_trip_is_byte_identical() {
        let mut g = Pdag::new(5);
        g.add_directed(3, 1).unwrap();
        g.add_directed(0, 4).unwrap();
        g.add_undirected(2, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graph.txt");
        write_graph(&path, &g).unwrap();
        let first = fs::read(&path).unwrap();
        let back = read_graph(&path).unwrap();
        write_graph(&path, &back).unwrap();
        let second = fs::read(&path).unwrap();
        assert_eq!(first, second);
        assert_eq!(
            String::from_utf8(first).unwrap(),
            "p 5\n0 -> 4\n3 -> 1\n0 -- 2\n"
        );
    }

    #[test]
    fn graph_reader_rejects_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad-graph.txt");
        for bad in [
            "q 5\n",
            "p 3\n0 => 1\n",
            "p 3\n0 -> 3\n",
            "p 3\n0 -> 1 extra\n",
            "p 3\n0 -> 1\n1 -- 0\n",
        ] {
            fs::write(&path, bad).unwrap();
            assert!(read_graph(&path).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn dag_reader_rejects_undirected_edges_and_cycles() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dag.txt");
        fs::write(&path, "p 2\n0 -- 1\n").unwrap();
        assert!(read_dag(&path).is_err());
        fs::write(&path, "p 2\n0 -> 1\n1 -> 0\n").unwrap();
        assert!(read_dag(&path).is_err());
        fs::write(&path, "p 2\n0 -> 1\n").unwrap();
        assert_eq!(read_dag(&path).unwrap().num_edges(), 1);
    }

    #[test]
    fn data_csv_round_trip_recovers_exact_values() {
        let values = vec![
            0.1,
            -1.5e-17,
            f64::MIN_POSITIVE,
            123456.789012345,
            -0.30000000000000004,
            2.0,
        ];
        let data = DataMatrix::from_values(3, 2, values.clone());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        write_data_csv(&path, &data).unwrap();
        let back = read_data_csv(&path).unwrap();
        assert_eq!(back.num_rows(), 3);
        assert_eq!(back.num_cols(), 2);
        let bits: Vec<u64> = back.values().iter().map(|x| x.to_bits()).collect();
        let want: Vec<u64> = values.iter().map(|x| x.to_bits()).collect();
        assert_eq!(bits, want);
    }

    #[test]
    fn data_csv_reader_reports_bad_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad-data.csv");
        fs::write(&path, "V0,V1\n1.0,2.0\n3.0,oops\n").unwrap();
        let err = read_data_csv(&path).unwrap_err();
        assert!(err.to_string().contains("row 3, column 1"), "{err}");
        fs::write(&path, "V0,V1\n1.0,2.0\n3.0\n").unwrap();
        assert!(read_data_csv(&path).is_err());
        fs::write(&path, "V0,V1\n").unwrap();
        assert!(read_data_csv(&path).is_err());
    }

    #[test]
    fn shuffle_map_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shuffle.csv");
        let map = vec![2usize, 0, 3, 1];
        write_shuffle_csv(&path, &map).unwrap();
        assert_eq!(read_shuffle_csv(&path, 4).unwrap(), map);
        assert!(read_shuffle_csv(&path, 5).is_err());
        fs::write(&path, "orig_index,shuffled_index\n0,0\n1,0\n").unwrap();
        assert!(read_shuffle_csv(&path, 2).is_err());
    }

    #[test]
    fn relabeling_through_a_map_and_back_is_identity() {
        let mut g = Pdag::new(4);
        g.add_directed(0, 2).unwrap();
        g.add_undirected(1, 3).unwrap();
        let map = vec![3usize, 1, 0, 2];
        let there = relabel_graph(&g, &map);
        assert!(there.has_directed(3, 0));
        assert!(there.has_undirected(1, 2));
        let back = relabel_graph(&there, &invert_map(&map));
        assert!(boss_core::cpdag_equal(&g, &back));
    }

    #[test]
    fn constant_columns_are_rejected() {
        let data = DataMatrix::from_values(3, 2, vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        let err = reject_constant_columns(Path::new("x.csv"), &data).unwrap_err();
        assert!(err.to_string().contains("column 1"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
}
