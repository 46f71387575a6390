//! Directed edge lists and the bundled benchmark topologies.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub capacities: Option<Vec<f64>>,
}

impl GraphFile {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>, capacities: Option<Vec<f64>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(u, v) in &edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidInstance(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidInstance(format!("self-loop at {u}")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidInstance(format!("duplicate edge ({u},{v})")));
            }
        }
        if let Some(c) = &capacities {
            if c.len() != edges.len() {
                return Err(Error::Dimension("one capacity per edge required".into()));
            }
        }
        Ok(GraphFile {
            vertices,
            edges,
            capacities,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.1 == v).count()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == v).count()
    }

    /// Reads `u,v[,capacity]` lines after a header. A `# vertices: N`
    /// comment fixes the vertex count; otherwise it is one past the largest
    /// id.
    pub fn from_reader(src: impl Read, name: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: name.into(),
            line: line as u64,
            msg,
        };
        let mut text = String::new();
        std::io::BufReader::new(src).read_to_string(&mut text)?;
        let mut declared = None;
        let mut header = None;
        let mut edges = Vec::new();
        let mut caps = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                if let Some(n) = c.trim().strip_prefix("vertices:") {
                    let n = n
                        .trim()
                        .parse()
                        .map_err(|_| err(line_no, format!("bad vertex count {n:?}")))?;
                    declared = Some(n);
                }
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let Some(width) = header else {
                match cols.as_slice() {
                    ["u", "v"] => header = Some(2),
                    ["u", "v", "capacity"] => header = Some(3),
                    _ => return Err(err(line_no, "expected header u,v[,capacity]".into())),
                }
                continue;
            };
            if cols.len() != width {
                return Err(err(
                    line_no,
                    format!("expected {width} columns, found {}", cols.len()),
                ));
            }
            let id = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| err(line_no, format!("bad vertex id {s:?}")))
            };
            let (u, v) = (id(cols[0])?, id(cols[1])?);
            if u == v {
                return Err(err(line_no, format!("self-loop at {u}")));
            }
            if !seen.insert((u, v)) {
                return Err(err(line_no, format!("duplicate edge ({u},{v})")));
            }
            if let Some(n) = declared {
                if u >= n || v >= n {
                    return Err(err(line_no, format!("vertex id out of range 0..{n}")));
                }
            }
            if width == 3 {
                let c: f64 = cols[2]
                    .parse()
                    .ok()
                    .filter(|c: &f64| c.is_finite() && *c >= 0.0)
                    .ok_or_else(|| err(line_no, format!("bad capacity {:?}", cols[2])))?;
                caps.push(c);
            }
            edges.push((u, v));
        }
        if header.is_none() {
            return Err(err(1, "missing header".into()));
        }
        let vertices =
            declared.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
        GraphFile::new(vertices, edges, (header == Some(3)).then_some(caps))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        GraphFile::from_reader(std::fs::File::open(path)?, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# vertices: {}\n", self.vertices);
        match &self.capacities {
            None => {
                out.push_str("u,v\n");
                for (u, v) in &self.edges {
                    out.push_str(&format!("{u},{v}\n"));
                }
            }
            Some(c) => {
                out.push_str("u,v,capacity\n");
                for ((u, v), c) in self.edges.iter().zip(c) {
                    out.push_str(&format!("{u},{v},{c}\n"));
                }
            }
        }
        out
    }
}

/// Topologies shipped with the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bundled {
    Polska,
    Pdh,
    Usanet,
    Geant,
}

impl Bundled {
    pub const ALL: [Bundled; 4] = [Bundled::Polska, Bundled::Pdh, Bundled::Usanet, Bundled::Geant];

    pub fn name(self) -> &'static str {
        match self {
            Bundled::Polska => "polska",
            Bundled::Pdh => "pdh",
            Bundled::Usanet => "usanet",
            Bundled::Geant => "geant",
        }
    }

    /// Published vertex and edge counts.
    pub fn size(self) -> (usize, usize) {
        match self {
            Bundled::Polska => (12, 18),
            Bundled::Pdh => (11, 34),
            Bundled::Usanet => (24, 43),
            Bundled::Geant => (40, 61),
        }
    }

    fn source(self) -> &'static str {
        match self {
            Bundled::Polska => include_str!("../data/polska.csv"),
            Bundled::Pdh => include_str!("../data/pdh.csv"),
            Bundled::Usanet => include_str!("../data/usanet.csv"),
            Bundled::Geant => include_str!("../data/geant.csv"),
        }
    }

    pub fn load(self) -> Result<GraphFile> {
        let g = GraphFile::from_reader(self.source().as_bytes(), self.name())?;
        let (n, m) = self.size();
        if g.vertices != n || g.edge_count() != m {
            return Err(Error::InvalidInstance(format!(
                "{}: expected {n} vertices and {m} edges, found {} and {}",
                self.name(),
                g.vertices,
                g.edge_count()
            )));
        }
        Ok(g)
    }
}

impl fmt::Display for Bundled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bundled {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Bundled::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown bundled graph {s:?}")))
    }
}

/// A bundled graph by name, or a graph file by path.
pub fn resolve_graph(name: &str) -> Result<GraphFile> {
    match name.parse::<Bundled>() {
        Ok(b) => b.load(),
        Err(_) => GraphFile::load(name),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sizes() {
        for b in Bundled::ALL {
            let g = b.load().unwrap();
            assert_eq!((g.vertices, g.edge_count()), b.size(), "{b}");
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let src = "u,v\n0,1\n1,2\n0,1\n";
        match GraphFile::from_reader(src.as_bytes(), "x.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let src = "u,v\n0,a\n";
        assert!(matches!(
            GraphFile::from_reader(src.as_bytes(), "x.csv"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn edgeless_and_capacities() {
        let g = GraphFile::from_reader("# vertices: 3\nu,v\n".as_bytes(), "e").unwrap();
        assert_eq!(g.vertices, 3);
        assert!(g.edges.is_empty());
        let g = GraphFile::from_reader("u,v,capacity\n0,1,2.5\n".as_bytes(), "c").unwrap();
        assert_eq!(g.capacities, Some(vec![2.5]));
        let back = GraphFile::from_reader(g.to_csv().as_bytes(), "c").unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn reverse_edge_is_not_a_duplicate() {
        let g = GraphFile::from_reader("u,v\n0,1\n1,0\n".as_bytes(), "r").unwrap();
        assert_eq!(g.edge_count(), 2);
    }
}
