use crate::error::{Error, Result};
use crate::problems::routing::{Edge, RoutingNetwork};
use crate::scalar::Real;

const LINK_COLUMNS: usize = 10;

/// Parses a TNTP `_net` file.
///
/// Only `capacity` and `free_flow_time` are kept from each link row. Node ids
/// are 1-based in the file and 0-based in the result. The network comes back
/// without noise, OD pairs or paths.
pub fn parse_tntp<T: Real>(text: &str) -> Result<RoutingNetwork<T>> {
    let mut nodes = None;
    let mut links = None;
    let mut body_start = None;
    let lines: Vec<&str> = text.lines().collect();
    for (i, raw) in lines.iter().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        if line.starts_with("<END OF METADATA>") {
            body_start = Some(i + 1);
            break;
        }
        if let Some(rest) = line.strip_prefix("<NUMBER OF NODES>") {
            nodes = Some(parse_count(rest, i + 1)?);
        } else if let Some(rest) = line.strip_prefix("<NUMBER OF LINKS>") {
            links = Some(parse_count(rest, i + 1)?);
        } else if !line.starts_with('<') {
            return Err(Error::Parse { line: i + 1, message: "data before <END OF METADATA>".into() });
        }
    }
    let last = lines.len().max(1);
    let body_start = body_start.ok_or(Error::Parse { line: last, message: "missing <END OF METADATA>".into() })?;
    let node_count = nodes.ok_or(Error::Parse { line: body_start, message: "missing <NUMBER OF NODES>".into() })?;
    let link_count = links.ok_or(Error::Parse { line: body_start, message: "missing <NUMBER OF LINKS>".into() })?;

    let mut edges = Vec::with_capacity(link_count);
    for (i, raw) in lines.iter().enumerate().skip(body_start) {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().filter(|f| *f != ";").collect();
        if fields.len() < LINK_COLUMNS {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {LINK_COLUMNS} columns, found {}", fields.len()),
            });
        }
        let mut values = [0.0f64; LINK_COLUMNS];
        for (v, f) in values.iter_mut().zip(&fields) {
            *v = f
                .trim_end_matches(';')
                .parse()
                .map_err(|_| Error::Parse { line: line_no, message: format!("non-numeric field {f:?}") })?;
        }
        let node = |x: f64| -> Result<usize> {
            if x.fract() != 0.0 || x < 1.0 || x > node_count as f64 {
                return Err(Error::Parse { line: line_no, message: format!("node id {x} outside 1..={node_count}") });
            }
            Ok(x as usize - 1)
        };
        let (tail, head) = (node(values[0])?, node(values[1])?);
        let (capacity, fft) = (values[2], values[4]);
        if !(capacity > 0.0 && fft > 0.0 && capacity.is_finite() && fft.is_finite()) {
            return Err(Error::Parse { line: line_no, message: "capacity and free-flow time must be positive".into() });
        }
        edges.push(Edge { tail, head, free_flow_time: T::lit(fft), capacity: T::lit(capacity), noise: None });
    }
    if edges.len() != link_count {
        return Err(Error::Parse { line: last, message: format!("header declares {link_count} links, found {}", edges.len()) });
    }
    RoutingNetwork::new(node_count, edges)
}

fn parse_count(rest: &str, line: usize) -> Result<usize> {
    rest.trim().parse().map_err(|_| Error::Parse { line, message: format!("bad count {:?}", rest.trim()) })
}
