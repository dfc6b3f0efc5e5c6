//! JSON inputs: group specs, cocycles, torus actions, models and the
//! catalog directory. Every rejection carries a JSON pointer.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use super::CliError;
use crate::bloch::{BlochError, ModelSpec};
use crate::groups::{central_extension_z2, CentralExtensionZ2, Group, GroupError, MagneticGroup};
use crate::torus::{AffineMap, AffineTorusAction};

fn invalid(pointer: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| invalid(ptr, "expected an object"))
}

fn only_keys(obj: &Map<String, Value>, ptr: &str, allowed: &[&str]) -> Result<(), CliError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(invalid(
            format!("{ptr}/{k}"),
            format!("unknown field; expected one of {allowed:?}"),
        )),
        None => Ok(()),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, ptr: &str, key: &str) -> Result<&'a Value, CliError> {
    obj.get(key)
        .ok_or_else(|| invalid(format!("{ptr}/{key}"), "missing field"))
}

fn uint(obj: &Map<String, Value>, ptr: &str, key: &str) -> Result<usize, CliError> {
    field(obj, ptr, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| invalid(format!("{ptr}/{key}"), "expected a non-negative integer"))
}

/// Deserializes with a pointer to the first offending field.
pub fn typed<T: DeserializeOwned>(v: &Value, ptr: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v.clone()).map_err(|e| {
        let path = e.path().to_string();
        let tail: String = if path == "." {
            String::new()
        } else {
            path.split('.')
                .flat_map(|seg| {
                    // "hoppings[0]" -> "/hoppings/0"
                    seg.split('[')
                        .map(|s| s.trim_end_matches(']').to_string())
                        .collect::<Vec<_>>()
                })
                .filter(|s| !s.is_empty())
                .map(|s| format!("/{s}"))
                .collect()
        };
        invalid(format!("{ptr}{tail}"), e.into_inner().to_string())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    None,
    OnN,
    OnH,
    Both,
}

fn rule(obj: &Map<String, Value>, ptr: &str) -> Result<Rule, CliError> {
    match obj.get("phi") {
        None => Ok(Rule::None),
        Some(Value::String(s)) => match s.as_str() {
            "none" => Ok(Rule::None),
            "on_n" => Ok(Rule::OnN),
            "on_h" => Ok(Rule::OnH),
            "both" => Ok(Rule::Both),
            _ => Err(invalid(format!("{ptr}/phi"), "expected none | on_n | on_h | both")),
        },
        Some(_) => Err(invalid(format!("{ptr}/phi"), "expected a string")),
    }
}

fn graded(n: usize, split: impl Fn(usize) -> (usize, usize), r: Rule) -> Vec<u8> {
    (0..n)
        .map(|x| {
            let (i, j) = split(x);
            (match r {
                Rule::None => 0,
                Rule::OnN => i,
                Rule::OnH => j,
                Rule::Both => i + j,
            } % 2) as u8
        })
        .collect()
}

fn group_error(e: GroupError, ptr: &str) -> CliError {
    let pointer = match &e {
        GroupError::NotAGroup { witness, .. } => format!("{ptr}/mul/{}/{}", witness[0], witness[1]),
        GroupError::NotGraded { witness, .. } => format!("{ptr}/phi/{}", witness[0]),
        GroupError::BadAction { .. } => format!("{ptr}/action"),
        _ => ptr.to_string(),
    };
    invalid(pointer, e.to_string())
}

/// A group with a (possibly trivial) grading, from any of the input forms:
/// `{n, mul, phi}` or `{"construct": cyclic | semidirect | dicyclic |
/// direct_product, ...}`.
pub fn parse_graded_group(v: &Value, ptr: &str) -> Result<(Group, Vec<u8>), CliError> {
    let obj = object(v, ptr)?;
    let Some(construct) = obj.get("construct") else {
        only_keys(obj, ptr, &["n", "mul", "phi"])?;
        let mul: Vec<Vec<usize>> = typed(field(obj, ptr, "mul")?, &format!("{ptr}/mul"))?;
        if let Some(n) = obj.get("n") {
            if n.as_u64() != Some(mul.len() as u64) {
                return Err(invalid(
                    format!("{ptr}/n"),
                    format!("does not match {} rows of mul", mul.len()),
                ));
            }
        }
        for (i, row) in mul.iter().enumerate() {
            if row.len() != mul.len() {
                return Err(invalid(
                    format!("{ptr}/mul/{i}"),
                    format!("row has {} entries", row.len()),
                ));
            }
            if let Some(j) = row.iter().position(|&x| x >= mul.len()) {
                return Err(invalid(format!("{ptr}/mul/{i}/{j}"), "entry out of range"));
            }
        }
        let n = mul.len();
        let phi: Vec<u8> = match obj.get("phi") {
            Some(p) => typed(p, &format!("{ptr}/phi"))?,
            None => vec![0; n],
        };
        if phi.len() != n {
            return Err(invalid(format!("{ptr}/phi"), format!("expected {n} entries")));
        }
        if let Some(i) = phi.iter().position(|&p| p > 1) {
            return Err(invalid(format!("{ptr}/phi/{i}"), "expected 0 or 1"));
        }
        let g = Group::from_table(mul).map_err(|e| group_error(e, ptr))?;
        return Ok((g, phi));
    };
    let cptr = format!("{ptr}/construct");
    let kind = construct.as_str().ok_or_else(|| invalid(&cptr, "expected a string"))?;
    match kind {
        "cyclic" => {
            only_keys(obj, ptr, &["construct", "m", "phi"])?;
            let m = uint(obj, ptr, "m")?;
            if m == 0 {
                return Err(invalid(format!("{ptr}/m"), "must be positive"));
            }
            Ok((Group::cyclic(m), graded(m, |x| (x, 0), rule(obj, ptr)?)))
        }
        "semidirect" => {
            only_keys(obj, ptr, &["construct", "m", "k", "action", "phi"])?;
            let (m, k) = (uint(obj, ptr, "m")?, uint(obj, ptr, "k")?);
            let g = Group::semidirect(m, k, uint(obj, ptr, "action")?).map_err(|e| group_error(e, ptr))?;
            Ok((g, graded(m * k, |x| (x % m, x / m), rule(obj, ptr)?)))
        }
        "dicyclic" => {
            only_keys(obj, ptr, &["construct", "m", "phi"])?;
            let m = uint(obj, ptr, "m")?;
            let g = Group::dicyclic(m).map_err(|e| group_error(e, ptr))?;
            let r = 2 * m;
            Ok((g, graded(4 * m, |x| (x % r, x / r), rule(obj, ptr)?)))
        }
        "direct_product" => {
            only_keys(obj, ptr, &["construct", "factors"])?;
            let fptr = format!("{ptr}/factors");
            let factors = field(obj, ptr, "factors")?
                .as_array()
                .filter(|a| !a.is_empty())
                .ok_or_else(|| invalid(&fptr, "expected a non-empty array"))?;
            let mut acc = parse_graded_group(&factors[0], &format!("{fptr}/0"))?;
            for (i, f) in factors.iter().enumerate().skip(1) {
                let (g, phi) = parse_graded_group(f, &format!("{fptr}/{i}"))?;
                let m = g.order();
                let prod = acc.0.direct_product(&g);
                let p = (0..prod.order()).map(|x| acc.1[x / m] ^ phi[x % m]).collect();
                acc = (prod, p);
            }
            Ok(acc)
        }
        _ => Err(invalid(
            cptr,
            "expected cyclic | semidirect | dicyclic | direct_product",
        )),
    }
}

pub fn parse_magnetic_group(v: &Value, ptr: &str) -> Result<MagneticGroup, CliError> {
    let (g, phi) = parse_graded_group(v, ptr)?;
    MagneticGroup::new(g, phi).map_err(|e| group_error(e, ptr))
}

pub fn parse_cocycle(v: &Value, ptr: &str) -> Result<Vec<Vec<i8>>, CliError> {
    let (v, ptr) = match v.get("cocycle") {
        Some(inner) => (inner, format!("{ptr}/cocycle")),
        None => (v, ptr.to_string()),
    };
    let c: Vec<Vec<i8>> = typed(v, &ptr)?;
    for (i, row) in c.iter().enumerate() {
        if let Some(j) = row.iter().position(|&x| x != 1 && x != -1) {
            return Err(invalid(format!("{ptr}/{i}/{j}"), "expected +1 or -1"));
        }
    }
    Ok(c)
}

pub fn extension(base: &MagneticGroup, cocycle: &[Vec<i8>], ptr: &str) -> Result<CentralExtensionZ2, CliError> {
    let n = base.order();
    if cocycle.len() != n || cocycle.iter().any(|r| r.len() != n) {
        return Err(invalid(ptr, format!("expected a {n}x{n} matrix")));
    }
    central_extension_z2(base, cocycle).map_err(|e| match &e {
        GroupError::NotACocycle { witness } => invalid(format!("{ptr}/{}/{}", witness[0], witness[1]), e.to_string()),
        _ => invalid(ptr, e.to_string()),
    })
}

/// `{"<element>": {"A": [[..]], "v": ["p/q", "p/q"]}}` covering every element.
pub fn parse_action(v: &Value, n: usize, ptr: &str) -> Result<AffineTorusAction, CliError> {
    let obj = object(v, ptr)?;
    let mut maps: Vec<Option<AffineMap>> = vec![None; n];
    for (key, entry) in obj {
        let eptr = format!("{ptr}/{key}");
        let g: usize = key
            .parse()
            .ok()
            .filter(|&g| g < n)
            .ok_or_else(|| invalid(&eptr, format!("key must be an element index below {n}")))?;
        let mut entry = entry.clone();
        if let Some(o) = entry.as_object_mut() {
            o.entry("v").or_insert_with(|| serde_json::json!(["0", "0"]));
        }
        maps[g] = Some(typed(&entry, &eptr)?);
    }
    let maps = maps
        .into_iter()
        .enumerate()
        .map(|(g, m)| m.ok_or_else(|| invalid(format!("{ptr}/{g}"), "missing element")))
        .collect::<Result<_, _>>()?;
    Ok(AffineTorusAction { maps })
}

pub fn action_to_json(action: &AffineTorusAction) -> Value {
    let map: BTreeMap<usize, &AffineMap> = action.maps.iter().enumerate().collect();
    let obj: Map<String, Value> = map
        .into_iter()
        .map(|(g, m)| (g.to_string(), serde_json::to_value(m).expect("serializable")))
        .collect();
    Value::Object(obj)
}

/// A model spec whose matrices have the declared shape and whose hoppings
/// form a Hermitian Bloch Hamiltonian.
pub fn parse_model(v: &Value, ptr: &str) -> Result<ModelSpec, CliError> {
    let spec: ModelSpec = typed(v, ptr)?;
    let n = spec.bands;
    if n == 0 {
        return Err(invalid(format!("{ptr}/bands"), "must be positive"));
    }
    let shape = |len: usize, at: String| {
        if len == n * n {
            Ok(())
        } else {
            Err(invalid(
                at,
                format!("expected {} entries for a {n}x{n} matrix, got {len}", n * n),
            ))
        }
    };
    for (i, h) in spec.hoppings.iter().enumerate() {
        shape(h.t.len(), format!("{ptr}/hoppings/{i}/t"))?;
    }
    for (name, s) in &spec.symmetries {
        shape(s.u.len(), format!("{ptr}/symmetries/{name}/U"))?;
        if let Some(Err(e)) = spec.symmetry(name) {
            let field = if matches!(e, BlochError::BadKmap) { "kmap" } else { "U" };
            return Err(invalid(format!("{ptr}/symmetries/{name}/{field}"), e.to_string()));
        }
    }
    if let Err(e) = spec.to_model() {
        let at = match &e {
            BlochError::NotHermitian(d) => spec
                .hoppings
                .iter()
                .position(|h| h.d == *d || h.d == [-d[0], -d[1]])
                .map_or(format!("{ptr}/hoppings"), |i| format!("{ptr}/hoppings/{i}/t")),
            _ => format!("{ptr}/hoppings"),
        };
        return Err(invalid(at, e.to_string()));
    }
    Ok(spec)
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid("", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid("", format!("{}: {e}", path.display())))
}

/// One file under `catalog/groups/`.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub spec: Value,
    pub group: MagneticGroup,
    pub twist: Option<Vec<Vec<i8>>>,
    /// Torus action of `G`, pulled back to extensions through the projection.
    pub action: Option<AffineTorusAction>,
    /// Spin operator, as an element of `G`.
    pub spin: Option<usize>,
}

impl CatalogEntry {
    pub fn from_json(v: &Value) -> Result<Self, CliError> {
        let obj = object(v, "")?;
        only_keys(obj, "", &["name", "description", "group", "twist", "action", "spin"])?;
        let name = field(obj, "", "name")?
            .as_str()
            .ok_or_else(|| invalid("/name", "expected a string"))?
            .to_string();
        let description = obj.get("description").and_then(Value::as_str).unwrap_or("").to_string();
        let spec = field(obj, "", "group")?.clone();
        let group = parse_magnetic_group(&spec, "/group")?;
        let twist = match obj.get("twist") {
            Some(t) => {
                let c = parse_cocycle(t, "/twist")?;
                extension(&group, &c, "/twist")?;
                Some(c)
            }
            None => None,
        };
        let action = match obj.get("action") {
            Some(a) => Some(parse_action(a, group.order(), "/action")?),
            None => None,
        };
        let spin = match obj.get("spin") {
            Some(s) => Some(
                s.as_u64()
                    .map(|x| x as usize)
                    .filter(|&x| x < group.order())
                    .ok_or_else(|| invalid("/spin", "expected an element index"))?,
            ),
            None => None,
        };
        Ok(Self {
            name,
            description,
            spec,
            group,
            twist,
            action,
            spin,
        })
    }

    pub fn extension(&self) -> Option<CentralExtensionZ2> {
        self.twist
            .as_ref()
            .map(|c| central_extension_z2(&self.group, c).expect("validated on load"))
    }

    /// The action pulled back to the total group of the extension.
    pub fn extension_action(&self) -> Option<AffineTorusAction> {
        let ext = self.extension()?;
        let a = self.action.as_ref()?;
        Some(a.restrict(&ext.proj))
    }
}

pub fn default_catalog_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/catalog"))
}

/// All entries under `<dir>/groups/*.json`, sorted by file name.
pub fn load_catalog(dir: &Path) -> Result<Vec<CatalogEntry>, CliError> {
    let gdir = dir.join("groups");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&gdir)
        .map_err(|e| invalid("", format!("{}: {e}", gdir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out: Vec<CatalogEntry> = Vec::new();
    for p in paths {
        let entry = CatalogEntry::from_json(&read_json(&p)?).map_err(|e| match e {
            CliError::Validation { pointer, message } => invalid(pointer, format!("{}: {message}", p.display())),
            other => other,
        })?;
        if out.iter().any(|e| e.name == entry.name) {
            return Err(invalid(
                "/name",
                format!("{}: duplicate catalog name {}", p.display(), entry.name),
            ));
        }
        out.push(entry);
    }
    Ok(out)
}

pub fn find_entry<'a>(catalog: &'a [CatalogEntry], name: &str) -> Result<&'a CatalogEntry, CliError> {
    catalog.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<_> = catalog.iter().map(|e| e.name.as_str()).collect();
        invalid("", format!("unknown builtin {name:?}; available: {}", names.join(", ")))
    })
}
