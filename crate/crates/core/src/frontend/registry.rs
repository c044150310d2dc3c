//! Runtime kernel registry with source-keyed compile caching.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::sync::{Arc, PoisonError, RwLock};

use super::interp::{self, KernelArg, StreamOutcome};
use super::{parse_kernels_in, parse_qasm_program, FrontendError, KernelDef, KernelSignature};
use crate::backend::{ExecutionMode, Session};
use crate::ir::Circuit;

#[derive(Default)]
struct Inner {
    kernels: HashMap<String, Arc<KernelDef>>,
    /// Compiled sources: hash -> (source text, kernel names it defined).
    cache: HashMap<u64, (String, Vec<String>)>,
    compile_count: usize,
}

/// Thread-safe store of compiled kernels. Cloning shares the same store.
#[derive(Clone, Default)]
pub struct KernelRegistry {
    inner: Arc<RwLock<Inner>>,
}

impl std::fmt::Debug for KernelRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelRegistry").field("kernels", &self.kernel_names()).finish()
    }
}

impl KernelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Inner> {
        self.inner.read().unwrap_or_else(PoisonError::into_inner)
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Inner> {
        self.inner.write().unwrap_or_else(PoisonError::into_inner)
    }

    /// Compiles and registers every kernel in `source`, returning their names. Compiling the
    /// same source again is a cache hit and does not reparse.
    pub fn jit_compile(&self, source: &str) -> Result<Vec<String>, FrontendError> {
        self.jit_compile_in(source, "<jit>", None)
    }

    /// Like [`jit_compile`](Self::jit_compile), naming the source `file` and resolving
    /// includes against `base_dir`.
    pub fn jit_compile_in(&self, source: &str, file: &str, base_dir: Option<&Path>) -> Result<Vec<String>, FrontendError> {
        let key = {
            let mut h = DefaultHasher::new();
            (source, file, base_dir).hash(&mut h);
            h.finish()
        };
        if let Some((text, names)) = self.read().cache.get(&key) {
            if text == source {
                return Ok(names.clone());
            }
        }
        let defs = parse_kernels_in(source, file, base_dir)?;
        let names: Vec<String> = defs.iter().map(|d| d.name().to_string()).collect();
        let mut inner = self.write();
        inner.compile_count += 1;
        for d in defs {
            inner.kernels.insert(d.name().to_string(), Arc::new(d));
        }
        inner.cache.insert(key, (source.to_string(), names.clone()));
        Ok(names)
    }

    /// Registers an already parsed kernel, replacing any kernel of the same name.
    pub fn register(&self, def: KernelDef) {
        self.write().kernels.insert(def.name().to_string(), Arc::new(def));
    }

    /// Loads a `.qk` source file, or a `.qasm` program as one kernel named after the file.
    pub fn load_file(&self, path: &Path) -> Result<Vec<String>, FrontendError> {
        let source = std::fs::read_to_string(path).map_err(|e| FrontendError::Io(format!("{}: {e}", path.display())))?;
        let file = path.display().to_string();
        let base = path.parent();
        if path.extension().is_some_and(|e| e == "qasm") {
            let name = path.file_stem().map_or("main".into(), |s| s.to_string_lossy().replace(|c: char| !c.is_alphanumeric(), "_"));
            let def = parse_qasm_program(&source, &name, &file, base)?;
            self.write().compile_count += 1;
            self.register(def);
            Ok(vec![name])
        } else {
            self.jit_compile_in(&source, &file, base)
        }
    }

    /// Number of times a source was actually parsed.
    pub fn compile_count(&self) -> usize {
        self.read().compile_count
    }

    pub fn kernel_names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.read().kernels.keys().cloned().collect();
        v.sort();
        v
    }

    pub fn get(&self, name: &str) -> Option<Arc<KernelDef>> {
        self.read().kernels.get(name).cloned()
    }

    pub fn get_kernel(&self, name: &str) -> Result<KernelHandle, FrontendError> {
        let def = self.get(name).ok_or_else(|| FrontendError::UnknownKernelName(name.to_string()))?;
        Ok(KernelHandle { registry: self.clone(), def })
    }

    /// Builds the circuit of kernel `name` for `args` (NISQ semantics).
    pub fn instantiate(&self, name: &str, args: &[KernelArg]) -> Result<Circuit, FrontendError> {
        self.get_kernel(name)?.instantiate(args)
    }

    /// Runs kernel `name` on `buffer` through `runtime`; `classical` fills the non-register
    /// parameters.
    pub fn invoke(
        &self,
        name: &str,
        buffer: &mut crate::backend::QRegBuffer,
        classical: &[KernelArg],
        runtime: &crate::runtime::QuantumRuntime,
    ) -> Result<(), crate::runtime::RuntimeError> {
        runtime.invoke(&self.get_kernel(name)?, buffer, classical)
    }

    /// Appends kernel `name` to `parent` as a sub-circuit.
    pub fn instantiate_into(&self, name: &str, args: &[KernelArg], parent: &mut Circuit) -> Result<(), FrontendError> {
        let def = self.get(name).ok_or_else(|| FrontendError::UnknownKernelName(name.to_string()))?;
        interp::instantiate(self, &def, args, Some(parent), ExecutionMode::Nisq, None).map(|_| ())
    }
}

/// A resolved kernel, callable by its handle.
#[derive(Clone, Debug)]
pub struct KernelHandle {
    registry: KernelRegistry,
    def: Arc<KernelDef>,
}

impl KernelHandle {
    pub fn name(&self) -> &str {
        self.def.name()
    }

    pub fn signature(&self) -> &KernelSignature {
        &self.def.signature
    }

    pub fn def(&self) -> &KernelDef {
        &self.def
    }

    pub fn registry(&self) -> &KernelRegistry {
        &self.registry
    }

    pub fn instantiate(&self, args: &[KernelArg]) -> Result<Circuit, FrontendError> {
        interp::instantiate(&self.registry, &self.def, args, None, ExecutionMode::Nisq, None)
    }

    /// Runs the kernel against a live session, branching on measurement results.
    pub fn stream(&self, args: &[KernelArg], session: &mut dyn Session) -> Result<StreamOutcome, FrontendError> {
        interp::stream(&self.registry, &self.def, args, session)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_hits_skip_parsing() {
        let r = KernelRegistry::new();
        let src = "__qpu__ void a(qreg q) { H(q[0]); }";
        assert_eq!(r.jit_compile(src).unwrap(), vec!["a"]);
        r.jit_compile(src).unwrap();
        assert_eq!(r.compile_count(), 1);
        r.jit_compile("__qpu__ void b(qreg q) { X(q[0]); }").unwrap();
        assert_eq!(r.compile_count(), 2);
        assert_eq!(r.kernel_names(), vec!["a", "b"]);
    }

    #[test]
    fn unknown_name() {
        let r = KernelRegistry::new();
        assert!(matches!(r.get_kernel("nope"), Err(FrontendError::UnknownKernelName(_))));
    }

    #[test]
    fn shared_across_threads() {
        let r = KernelRegistry::new();
        std::thread::scope(|s| {
            for k in 0..4 {
                let r = r.clone();
                s.spawn(move || r.jit_compile(&format!("__qpu__ void k{k}(qreg q) {{ H(q[0]); }}")).unwrap());
            }
        });
        assert_eq!(r.kernel_names().len(), 4);
    }

    #[test]
    fn load_qasm_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ghz.qasm");
        std::fs::write(&path, "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\nh q[0];\ncx q[0],q[1];\ncx q[1],q[2];\n").unwrap();
        let r = KernelRegistry::new();
        assert_eq!(r.load_file(&path).unwrap(), vec!["ghz"]);
        let def = r.get("ghz").unwrap();
        assert_eq!(def.declared_qubits, Some(3));
        assert_eq!(r.instantiate("ghz", &[KernelArg::Qreg(3)]).unwrap().flatten().len(), 3);
    }
}
