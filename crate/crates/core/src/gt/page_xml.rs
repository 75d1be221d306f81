//! PAGE XML text-line polygons.
//!
//! Writing emits one `TextRegion` holding a `TextLine` per polygon with
//! `Coords points="x,y x,y ..."`. Reading accepts the `points` attribute as
//! well as `Point x= y=` children.

use std::fmt::Write as _;
use std::path::Path;

use super::{Polygon, PolygonSet};
use crate::error::{Error, Result};

pub const PAGE_NAMESPACE: &str = "http://schema.primaresearch.org/PAGE/gts/pagecontent/2013-07-15";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PageDocument {
    pub image_filename: String,
    pub width: usize,
    pub height: usize,
    pub lines: PolygonSet,
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn points_string(poly: &Polygon) -> String {
    poly.iter()
        .map(|(x, y)| format!("{x},{y}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn page_xml_to_string(doc: &PageDocument) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(s, "<PcGts xmlns=\"{PAGE_NAMESPACE}\">");
    s.push_str("  <Metadata>\n    <Creator>mocseg</Creator>\n  </Metadata>\n");
    let _ = writeln!(
        s,
        "  <Page imageFilename=\"{}\" imageWidth=\"{}\" imageHeight=\"{}\">",
        escape(&doc.image_filename),
        doc.width,
        doc.height
    );
    let nonempty: Vec<&Polygon> = doc.lines.polygons.iter().filter(|p| !p.is_empty()).collect();
    if !doc.lines.is_empty() {
        let xs = nonempty.iter().flat_map(|p| p.iter().map(|q| q.0));
        let ys = nonempty.iter().flat_map(|p| p.iter().map(|q| q.1));
        let (x0, x1) = (xs.clone().min().unwrap_or(0), xs.max().unwrap_or(0));
        let (y0, y1) = (ys.clone().min().unwrap_or(0), ys.max().unwrap_or(0));
        s.push_str("    <TextRegion id=\"r1\">\n");
        let _ = writeln!(s, "      <Coords points=\"{x0},{y0} {x1},{y0} {x1},{y1} {x0},{y1}\"/>");
        for (i, poly) in doc.lines.polygons.iter().enumerate() {
            let _ = writeln!(s, "      <TextLine id=\"l{}\">", i + 1);
            let _ = writeln!(s, "        <Coords points=\"{}\"/>", points_string(poly));
            s.push_str("      </TextLine>\n");
        }
        s.push_str("    </TextRegion>\n");
    }
    s.push_str("  </Page>\n</PcGts>\n");
    s
}

pub fn write_page_xml(path: impl AsRef<Path>, doc: &PageDocument) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, page_xml_to_string(doc)).map_err(|e| Error::io(path, e))
}

fn parse_error(xml: &roxmltree::Document, node: roxmltree::Node, message: String) -> Error {
    let pos = xml.text_pos_at(node.range().start);
    Error::Parse {
        line: pos.row,
        column: pos.col,
        message,
    }
}

fn parse_int(xml: &roxmltree::Document, node: roxmltree::Node, s: &str) -> Result<i64> {
    s.trim()
        .parse::<i64>()
        .or_else(|_| s.trim().parse::<f64>().map(|v| v.round() as i64))
        .map_err(|_| parse_error(xml, node, format!("invalid coordinate {s:?}")))
}

fn parse_coords(xml: &roxmltree::Document, coords: roxmltree::Node) -> Result<Polygon> {
    if let Some(points) = coords.attribute("points") {
        return points
            .split_whitespace()
            .map(|pair| {
                let (x, y) = pair
                    .split_once(',')
                    .ok_or_else(|| parse_error(xml, coords, format!("coordinate pair {pair:?} lacks a comma")))?;
                Ok((parse_int(xml, coords, x)?, parse_int(xml, coords, y)?))
            })
            .collect();
    }
    coords
        .children()
        .filter(|n| n.is_element() && n.tag_name().name() == "Point")
        .map(|p| {
            let get = |name: &str| {
                p.attribute(name)
                    .ok_or_else(|| parse_error(xml, p, format!("Point lacks attribute {name}")))
                    .and_then(|v| parse_int(xml, p, v))
            };
            Ok((get("x")?, get("y")?))
        })
        .collect()
}

/// Parses a PAGE document; lines keep their document order.
pub fn page_xml_from_str(text: &str) -> Result<PageDocument> {
    let xml = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        Error::Parse {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let mut doc = PageDocument::default();
    if let Some(page) = xml
        .descendants()
        .find(|n| n.is_element() && n.tag_name().name() == "Page")
    {
        doc.image_filename = page.attribute("imageFilename").unwrap_or_default().to_string();
        doc.width = page.attribute("imageWidth").and_then(|v| v.parse().ok()).unwrap_or(0);
        doc.height = page.attribute("imageHeight").and_then(|v| v.parse().ok()).unwrap_or(0);
    }
    for line in xml
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "TextLine")
    {
        let coords = line
            .children()
            .find(|n| n.is_element() && n.tag_name().name() == "Coords")
            .ok_or_else(|| parse_error(&xml, line, "TextLine without Coords".into()))?;
        doc.lines.polygons.push(parse_coords(&xml, coords)?);
    }
    Ok(doc)
}

pub fn read_page_xml(path: impl AsRef<Path>) -> Result<PageDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    page_xml_from_str(&text)
}
