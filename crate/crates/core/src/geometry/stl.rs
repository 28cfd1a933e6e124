//! STL ingestion (binary and ASCII) and ASCII/binary STL writers.

use std::io::Write;

use nalgebra::Point3;

use super::{GeometryError, TriMesh};

const HEADER_LEN: usize = 80;
const RECORD_LEN: usize = 50;

/// Result of loading an STL file.
#[derive(Debug, Clone)]
pub struct LoadedStl {
    pub mesh: TriMesh,
    /// Facets in the file, including degenerate ones.
    pub facets: usize,
    /// Degenerate facets that were dropped.
    pub degenerate: usize,
}

/// Parses an STL file. Input starting with `solid` is tried as ASCII first
/// and falls back to binary, since some binary exporters write that prefix.
pub fn load_stl(bytes: &[u8]) -> Result<LoadedStl, GeometryError> {
    if bytes.starts_with(b"solid") {
        match parse_ascii(bytes) {
            Ok(facets) => return Ok(finish(facets)),
            // both failed: the text parse is the more informative error
            Err(ascii_err) => return parse_binary(bytes).map(finish).map_err(|_| ascii_err),
        }
    }
    parse_binary(bytes).map(finish)
}

fn finish(facets: Vec<[Point3<f64>; 3]>) -> LoadedStl {
    let count = facets.len();
    let (mesh, degenerate) = TriMesh::from_soup(&facets);
    LoadedStl {
        mesh,
        facets: count,
        degenerate,
    }
}

fn malformed(offset: usize, reason: impl Into<String>) -> GeometryError {
    GeometryError::MalformedFile {
        offset,
        reason: reason.into(),
    }
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<[Point3<f64>; 3]>, GeometryError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(malformed(bytes.len(), "file shorter than binary STL header"));
    }
    let declared = u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap()) as usize;
    let body = &bytes[HEADER_LEN + 4..];
    let available = body.len() / RECORD_LEN;
    if available < declared {
        return Err(malformed(
            HEADER_LEN + 4 + available * RECORD_LEN,
            format!("header declares {declared} facets but only {available} complete records follow"),
        ));
    }
    if body.len() != declared * RECORD_LEN {
        return Err(malformed(
            HEADER_LEN + 4 + declared * RECORD_LEN,
            format!(
                "{} trailing bytes after {declared} declared facets",
                body.len() - declared * RECORD_LEN
            ),
        ));
    }
    let read_f32 = |rec: &[u8], i: usize| -> f64 {
        f32::from_le_bytes(rec[4 * i..4 * i + 4].try_into().unwrap()) as f64
    };
    let mut facets = Vec::with_capacity(declared);
    for (k, rec) in body.chunks_exact(RECORD_LEN).enumerate() {
        // floats 0..3 are the stored normal, ignored
        let v = |j: usize| Point3::new(read_f32(rec, 3 + 3 * j), read_f32(rec, 4 + 3 * j), read_f32(rec, 5 + 3 * j));
        let facet = [v(0), v(1), v(2)];
        if facet.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(malformed(HEADER_LEN + 4 + k * RECORD_LEN, "non-finite vertex coordinate"));
        }
        facets.push(facet);
    }
    Ok(facets)
}

/// Whitespace tokenizer that remembers byte offsets.
struct Tokens<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.src.len() && !self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .map(|s| (start, s))
    }

    fn skip_line(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
            self.pos += 1;
        }
    }

    fn expect(&mut self, word: &str) -> Result<usize, GeometryError> {
        match self.next() {
            Some((off, tok)) if tok.eq_ignore_ascii_case(word) => Ok(off),
            Some((off, tok)) => Err(malformed(off, format!("expected `{word}`, found `{tok}`"))),
            None => Err(malformed(self.src.len(), format!("expected `{word}`, found end of file"))),
        }
    }

    fn number(&mut self) -> Result<f64, GeometryError> {
        match self.next() {
            Some((off, tok)) => tok
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(off, format!("invalid number `{tok}`"))),
            None => Err(malformed(self.src.len(), "expected number, found end of file")),
        }
    }
}

fn parse_ascii(bytes: &[u8]) -> Result<Vec<[Point3<f64>; 3]>, GeometryError> {
    let mut t = Tokens { src: bytes, pos: 0 };
    t.expect("solid")?;
    // the solid name runs to the end of the line
    t.skip_line();
    let mut facets = Vec::new();
    loop {
        match t.next() {
            Some((_, tok)) if tok.eq_ignore_ascii_case("facet") => {
                t.expect("normal")?;
                for _ in 0..3 {
                    t.number()?;
                }
                t.expect("outer")?;
                t.expect("loop")?;
                let mut facet = [Point3::origin(); 3];
                for v in facet.iter_mut() {
                    t.expect("vertex")?;
                    *v = Point3::new(t.number()?, t.number()?, t.number()?);
                }
                t.expect("endloop")?;
                t.expect("endfacet")?;
                facets.push(facet);
            }
            Some((_, tok)) if tok.eq_ignore_ascii_case("endsolid") => return Ok(facets),
            Some((off, tok)) => {
                return Err(malformed(off, format!("expected `facet` or `endsolid`, found `{tok}`")))
            }
            None => return Err(malformed(bytes.len(), "missing `endsolid`")),
        }
    }
}

/// Writes a mesh as ASCII STL with recomputed facet normals.
pub fn write_ascii_stl(mesh: &TriMesh, name: &str, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "solid {name}")?;
    for i in 0..mesh.triangles.len() {
        let n = mesh.normal(i);
        writeln!(out, "  facet normal {} {} {}", n.x, n.y, n.z)?;
        writeln!(out, "    outer loop")?;
        for p in mesh.triangle(i) {
            writeln!(out, "      vertex {} {} {}", p.x, p.y, p.z)?;
        }
        writeln!(out, "    endloop")?;
        writeln!(out, "  endfacet")?;
    }
    writeln!(out, "endsolid {name}")
}

/// Encodes a mesh as binary STL (coordinates narrowed to `f32`).
pub fn to_binary_stl(mesh: &TriMesh) -> Vec<u8> {
    let mut out = vec![0u8; HEADER_LEN];
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for i in 0..mesh.triangles.len() {
        let n = mesh.normal(i);
        for c in n.iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        for p in mesh.triangle(i) {
            for c in p.coords.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}
