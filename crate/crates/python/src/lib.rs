//! Python bindings. Results cross the boundary as JSON and arrive as plain
//! dicts and lists; errors become `ValueError` (invalid input, with the
//! JSON pointer) or `ArithmeticError` (numerical contract failures).

use magk::bloch::{self, ChernOptions, ModelSpec, TightBindingModel};
use magk::cli::input::{self, CatalogEntry};
use magk::cli::{model_invariants, report, CliError, GroupInput, VERSION};
use magk::corep::TypeLabel;
use magk::kcoeff::bott_coefficients;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyComplex;
use serde_json::Value;

fn err(e: CliError) -> PyErr {
    match e {
        CliError::Validation { pointer, message } => PyValueError::new_err(format!("{pointer}: {message}")),
        CliError::Numerical(m) => PyArithmeticError::new_err(m),
    }
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).expect("serializable");
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn catalog() -> PyResult<Vec<CatalogEntry>> {
    input::load_catalog(&input::default_catalog_dir()).map_err(err)
}

/// A finite group with a grading onto Z2, optionally twisted by a central
/// Z2 extension.
#[pyclass(name = "MagneticGroup", module = "magk")]
struct PyMagneticGroup {
    inner: GroupInput,
}

#[pymethods]
impl PyMagneticGroup {
    /// From a group spec dict: `{"mul": [[..]], "phi": [..]}` or
    /// `{"construct": "cyclic" | "semidirect" | "dicyclic" | "direct_product", ...}`.
    #[staticmethod]
    #[pyo3(signature = (spec, twist=None))]
    fn from_spec(spec: &Bound<'_, PyAny>, twist: Option<Vec<Vec<i8>>>) -> PyResult<Self> {
        let inner = GroupInput::new(&from_py(spec)?, None, twist).map_err(err)?;
        Ok(Self { inner })
    }

    /// A catalog entry; `twisted=True` applies its shipped cocycle.
    #[staticmethod]
    #[pyo3(signature = (name, twisted=false))]
    fn builtin(name: &str, twisted: bool) -> PyResult<Self> {
        let cat = catalog()?;
        let entry = input::find_entry(&cat, name).map_err(err)?.clone();
        let twist = match (twisted, &entry.twist) {
            (false, _) => None,
            (true, Some(t)) => Some(t.clone()),
            (true, None) => return Err(PyValueError::new_err(format!("{name} has no twist"))),
        };
        let inner = GroupInput::new(&entry.spec.clone(), Some(entry), twist).map_err(err)?;
        Ok(Self { inner })
    }

    /// Order of the group, or of the extension when twisted.
    #[getter]
    fn order(&self) -> usize {
        self.inner
            .ext
            .as_ref()
            .map_or(self.inner.graded.0.order(), |e| e.total.order())
    }

    #[getter]
    fn base_order(&self) -> usize {
        self.inner.graded.0.order()
    }

    #[getter]
    fn phi(&self) -> Vec<u8> {
        self.inner.graded.1.clone()
    }

    #[getter]
    fn twisted(&self) -> bool {
        self.inner.ext.is_some()
    }

    /// Product in the base group.
    fn multiply(&self, a: usize, b: usize) -> PyResult<usize> {
        let n = self.base_order();
        if a >= n || b >= n {
            return Err(PyValueError::new_err(format!("elements must be below {n}")));
        }
        Ok(self.inner.graded.0.mul(a, b))
    }

    /// Irreducible types, generators and the restriction theorem check.
    fn classify(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let ctx = self.inner.context().map_err(err)?;
        to_py(py, &report::classify_result(&ctx).map_err(|e| err(e.into()))?)
    }

    fn restrict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let ctx = self.inner.context().map_err(err)?;
        to_py(py, &report::restrict_result(&ctx).map_err(|e| err(e.into()))?)
    }

    #[pyo3(signature = (qmin=-7, qmax=0))]
    fn ktable(&self, py: Python<'_>, qmin: i64, qmax: i64) -> PyResult<Py<PyAny>> {
        if qmin > qmax {
            return Err(PyValueError::new_err("qmin exceeds qmax"));
        }
        let basis = self.inner.context().and_then(|c| Ok(c.corep_basis()?)).map_err(err)?;
        to_py(py, &report::ktable_result(&basis, qmin, qmax))
    }

    /// Rational ranks of equivariant K-theory of the 2-torus. `action` maps
    /// element indices to `{"A": [[..]], "v": ["p/q", "p/q"]}`.
    #[pyo3(signature = (action=None))]
    fn torus_rank(&self, py: Python<'_>, action: Option<&Bound<'_, PyAny>>) -> PyResult<Py<PyAny>> {
        let action = action.map(from_py).transpose()?;
        let (_, result) = self.inner.torus_rank(action.as_ref()).map_err(err)?;
        to_py(py, &result)
    }

    fn __repr__(&self) -> String {
        let name = self.inner.entry.as_ref().map_or("custom", |e| e.name.as_str());
        let twisted = if self.twisted() { "True" } else { "False" };
        format!("MagneticGroup({name}, order={}, twisted={twisted})", self.order())
    }
}

/// A tight-binding model on the square lattice with its named symmetries.
#[pyclass(name = "Model", module = "magk")]
struct PyModel {
    spec: ModelSpec,
    model: TightBindingModel,
}

impl PyModel {
    fn from_model_spec(spec: ModelSpec) -> PyResult<Self> {
        let model = spec.to_model().map_err(|e| err(e.into()))?;
        Ok(Self { spec, model })
    }

    fn run(&self, py: Python<'_>, mesh: usize, gap_tol: f64, tol: f64, full: bool) -> PyResult<Py<PyAny>> {
        let opts = ChernOptions {
            mesh,
            gap_rel_tol: gap_tol,
            symmetry_tol: tol,
        };
        let r = model_invariants(&self.spec, &opts, full).map_err(err)?;
        to_py(py, &serde_json::to_value(r).expect("serializable"))
    }
}

#[pymethods]
impl PyModel {
    /// The four-band C4T and Sz symmetric model; |mass| < 2 is topological.
    #[staticmethod]
    #[pyo3(signature = (mass=1.0))]
    fn builtin_c4t(mass: f64) -> PyResult<Self> {
        let (m, c4t, sz) = bloch::builtin_c4t_model(mass);
        Self::from_model_spec(ModelSpec::from_model(&m, &[("c4t", &c4t), ("sz", &sz)]))
    }

    /// From a model spec dict `{"bands", "fermi", "hoppings", "symmetries"}`.
    #[staticmethod]
    fn from_spec(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        let spec = input::parse_model(&from_py(spec)?, "/model").map_err(err)?;
        Self::from_model_spec(spec)
    }

    /// A copy with a random C4T and Sz symmetric perturbation of relative
    /// size `scale`.
    #[pyo3(signature = (scale, seed=0))]
    fn perturbed(&self, scale: f64, seed: u64) -> PyResult<Self> {
        let (Some(Ok(c4t)), Some(Ok(sz))) = (self.spec.symmetry("c4t"), self.spec.symmetry("sz")) else {
            return Err(PyValueError::new_err("model needs valid c4t and sz symmetries"));
        };
        let p = bloch::random_symmetric_perturbation(&self.model, &c4t, &sz, scale, seed);
        Self::from_model_spec(ModelSpec::from_model(&p, &[("c4t", &c4t), ("sz", &sz)]))
    }

    #[getter]
    fn bands(&self) -> usize {
        self.model.n
    }

    fn spec(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &serde_json::to_value(&self.spec).expect("serializable"))
    }

    /// H(k) as a list of rows of complex numbers.
    fn hamiltonian<'py>(&self, py: Python<'py>, kx: f64, ky: f64) -> Vec<Vec<Bound<'py, PyComplex>>> {
        let h = self.model.hamiltonian_at([kx, ky]);
        (0..h.nrows())
            .map(|i| {
                (0..h.ncols())
                    .map(|j| PyComplex::from_doubles(py, h[(i, j)].re, h[(i, j)].im))
                    .collect()
            })
            .collect()
    }

    #[pyo3(signature = (mesh=48, gap_tol=1e-6, tol=1e-8))]
    fn chern(&self, py: Python<'_>, mesh: usize, gap_tol: f64, tol: f64) -> PyResult<Py<PyAny>> {
        self.run(py, mesh, gap_tol, tol, false)
    }

    /// Total and spin Chern numbers and the spin Chern parity.
    #[pyo3(signature = (mesh=48, gap_tol=1e-6, tol=1e-8))]
    fn z2(&self, py: Python<'_>, mesh: usize, gap_tol: f64, tol: f64) -> PyResult<Py<PyAny>> {
        self.run(py, mesh, gap_tol, tol, true)
    }

    fn __repr__(&self) -> String {
        format!("Model(bands={}, hoppings={})", self.model.n, self.model.hoppings.len())
    }
}

/// `KO^q`, `K^q` or `KSp^q` of a point for field "R", "C" or "H".
#[pyfunction]
fn bott(field: &str, q: i64) -> PyResult<String> {
    let label = match field {
        "R" => TypeLabel::R,
        "C" => TypeLabel::C,
        "H" => TypeLabel::H,
        _ => return Err(PyValueError::new_err("field must be R, C or H")),
    };
    Ok(bott_coefficients(label, q).to_string())
}

#[pyfunction]
fn catalog_names() -> PyResult<Vec<String>> {
    Ok(catalog()?.into_iter().map(|e| e.name).collect())
}

/// The full verification sweep; the dict has `all_pass` and `failed`.
#[pyfunction]
fn verify_all(py: Python<'_>) -> PyResult<Py<PyAny>> {
    let (report, _) = report::verify_all(&catalog()?);
    to_py(py, &report)
}

#[pymodule(name = "magk")]
fn magk_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", VERSION)?;
    m.add_class::<PyMagneticGroup>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(bott, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    Ok(())
}
