//! Small named structures used as templates and instances throughout.

use crate::structure::Structure;

/// Complete graph on `n` atoms named `first..first+n`, edges both ways.
pub fn complete_graph(n: usize, first: usize) -> Structure {
    let names: Vec<String> = (first..first + n).map(|i| i.to_string()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let edges = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| vec![a, b]))
        .collect();
    Structure::from_parts(&refs, &[("E", 2, edges)]).expect("valid graph")
}

/// Undirected cycle on `n >= 3` atoms `0..n`.
pub fn cycle(n: usize) -> Structure {
    let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let edges = (0..n)
        .flat_map(|i| [vec![i, (i + 1) % n], vec![(i + 1) % n, i]])
        .collect();
    Structure::from_parts(&refs, &[("E", 2, edges)]).expect("valid cycle")
}

pub fn k2() -> Structure {
    complete_graph(2, 0)
}

/// Atoms are `1`, `2`, `3`.
pub fn k3() -> Structure {
    complete_graph(3, 1)
}

pub fn c5() -> Structure {
    cycle(5)
}

/// Boolean ternary relation `{100, 010, 001}` under symbol `R`.
pub fn one_in_three() -> Structure {
    Structure::from_parts(
        &["0", "1"],
        &[("R", 3, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]])],
    )
    .expect("valid")
}

/// Boolean ternary not-all-equal relation under symbol `R`.
pub fn nae() -> Structure {
    let tuples = crate::structure::lex_tuples(2, 3)
        .into_iter()
        .filter(|t| !(t[0] == t[1] && t[1] == t[2]))
        .collect();
    Structure::from_parts(&["0", "1"], &[("R", 3, tuples)]).expect("valid")
}

/// Boolean domain whose only relation is the full unary `R_1`.
pub fn bool_unary() -> Structure {
    Structure::from_parts(&["0", "1"], &[("R_1", 1, vec![vec![0], vec![1]])]).expect("valid")
}

/// Every bundled template with its file stem.
pub fn bundled() -> Vec<(&'static str, Structure)> {
    vec![
        ("k2", k2()),
        ("k3", k3()),
        ("c5", c5()),
        ("one_in_three", one_in_three()),
        ("nae", nae()),
        ("bool_unary", bool_unary()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(k3().relation("E").unwrap().len(), 6);
        assert_eq!(c5().relation("E").unwrap().len(), 10);
        assert_eq!(nae().relation("R").unwrap().len(), 6);
    }
}
