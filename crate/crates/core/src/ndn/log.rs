//! Event-log records: `time_ms,node_id,event,name,nonce`.
//!
//! Names may themselves contain commas (`x,y` positions), so readers split
//! off the first three fields from the left and the nonce from the right.

use alloc::string::String;
use core::fmt;

use crate::name::Name;
use crate::sim::SimTime;

use super::packet::Nonce;

pub const HEADER: &str = "time_ms,node_id,event,name,nonce";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Send,
    Recv,
    Drop,
    CacheHit,
    Aggregate,
    Timeout,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Send => "SEND",
            EventKind::Recv => "RECV",
            EventKind::Drop => "DROP",
            EventKind::CacheHit => "CACHE_HIT",
            EventKind::Aggregate => "AGGREGATE",
            EventKind::Timeout => "TIMEOUT",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "SEND" => EventKind::Send,
            "RECV" => EventKind::Recv,
            "DROP" => EventKind::Drop,
            "CACHE_HIT" => EventKind::CacheHit,
            "AGGREGATE" => EventKind::Aggregate,
            "TIMEOUT" => EventKind::Timeout,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time: SimTime,
    pub node: usize,
    pub kind: EventKind,
    pub name: Name,
    /// `None` for Data packets.
    pub nonce: Option<Nonce>,
}

impl fmt::Display for EventRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},", self.time, self.node, self.kind.as_str(), self.name)?;
        match self.nonce {
            Some(Nonce(n)) => write!(f, "{n}"),
            None => f.write_str("-"),
        }
    }
}

impl EventRecord {
    pub fn parse(line: &str) -> Option<EventRecord> {
        let mut left = line.splitn(4, ',');
        let time: f64 = left.next()?.parse().ok()?;
        let node: usize = left.next()?.parse().ok()?;
        let kind = EventKind::parse(left.next()?)?;
        let rest = left.next()?;
        let (name, nonce) = rest.rsplit_once(',')?;
        let nonce = match nonce {
            "-" => None,
            n => Some(Nonce(n.parse().ok()?)),
        };
        Some(EventRecord { time: SimTime::from_ms(time), node, kind, name: name.parse().ok()?, nonce })
    }

    pub fn render(&self) -> String {
        alloc::format!("{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_and_parses_with_commas_in_name() {
        let r = EventRecord {
            time: SimTime::from_ms(0.085333),
            node: 3,
            kind: EventKind::Send,
            name: "/FastCharging/Discovery/1,2+0.5km/-/-/-/-/-/0".parse().unwrap(),
            nonce: Some(Nonce(42)),
        };
        let line = r.render();
        assert_eq!(line, "0.085333,3,SEND,/FastCharging/Discovery/1,2+0.5km/-/-/-/-/-/0,42");
        assert_eq!(EventRecord::parse(&line), Some(r));
        let d = EventRecord::parse("1.000000,0,RECV,/a/b,-").unwrap();
        assert_eq!(d.nonce, None);
        assert_eq!(d.kind, EventKind::Recv);
    }
}
