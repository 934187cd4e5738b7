//! Locating checkpoint files: a local directory, the download cache, or the
//! Hugging Face hub.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use infodemic::{Error, Result};

use crate::model::{PYTORCH_FILE, SAFETENSORS_FILE};
use crate::tokenizer::TOKENIZER_FILES;

/// Overrides the download cache directory.
pub const CACHE_ENV: &str = "INFODEMIC_CACHE";
/// Overrides the hub base URL.
pub const ENDPOINT_ENV: &str = "HF_ENDPOINT";
/// When set to a non-empty value other than `0`, nothing is downloaded.
pub const OFFLINE_ENV: &str = "INFODEMIC_OFFLINE";

pub const DEFAULT_ENDPOINT: &str = "https://huggingface.co";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hub {
    pub cache_dir: PathBuf,
    pub endpoint: String,
    pub offline: bool,
}

impl Hub {
    /// Settings taken from the environment.
    pub fn from_env() -> Self {
        let cache_dir = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("XDG_CACHE_HOME").map(|p| PathBuf::from(p).join("infodemic")))
            .or_else(|| std::env::var_os("HOME").map(|p| PathBuf::from(p).join(".cache").join("infodemic")))
            .unwrap_or_else(|| PathBuf::from(".infodemic-cache"));
        let endpoint = std::env::var(ENDPOINT_ENV).unwrap_or_else(|_| DEFAULT_ENDPOINT.to_string());
        let offline = std::env::var(OFFLINE_ENV).is_ok_and(|v| !v.is_empty() && v != "0");
        Hub {
            cache_dir,
            endpoint,
            offline,
        }
    }

    pub fn cache_path(&self, id: &str) -> PathBuf {
        self.cache_dir.join(id.replace('/', "--"))
    }

    /// Whether `id` names something this hub could serve: a local checkpoint
    /// directory or an `owner/name` repository.
    pub fn recognises(id: &str) -> bool {
        is_checkpoint_dir(Path::new(id)) || looks_like_repo(id)
    }

    /// Directory holding the checkpoint for `id`, downloading it if needed.
    pub fn resolve(&self, id: &str) -> Result<PathBuf> {
        let local = Path::new(id);
        if is_checkpoint_dir(local) {
            return Ok(local.to_path_buf());
        }
        let cached = self.cache_path(id);
        if is_checkpoint_dir(&cached) {
            return Ok(cached);
        }
        if !looks_like_repo(id) {
            return Err(Error::UnknownBackend(id.to_string()));
        }
        if self.offline {
            return Err(Error::Backend(format!(
                "{id} is not in the cache at {} and downloads are disabled by {OFFLINE_ENV}",
                cached.display()
            )));
        }
        self.download(id, &cached)?;
        Ok(cached)
    }

    fn download(&self, id: &str, dest: &Path) -> Result<()> {
        fs::create_dir_all(dest).map_err(|e| Error::Backend(format!("{}: {e}", dest.display())))?;
        log::info!("downloading {id} into {}", dest.display());
        if !self.fetch(id, "config.json", dest)? {
            return Err(Error::Backend(format!("{id}: no config.json on {}", self.endpoint)));
        }
        if !self.fetch(id, SAFETENSORS_FILE, dest)? && !self.fetch(id, PYTORCH_FILE, dest)? {
            return Err(Error::Backend(format!("{id}: no model weights on {}", self.endpoint)));
        }
        for name in TOKENIZER_FILES {
            self.fetch(id, name, dest)?;
        }
        Ok(())
    }

    /// Downloads one file; `Ok(false)` if the hub does not have it.
    fn fetch(&self, id: &str, name: &str, dest: &Path) -> Result<bool> {
        let url = format!("{}/{id}/resolve/main/{name}", self.endpoint.trim_end_matches('/'));
        let response = match ureq::get(&url).call() {
            Ok(r) => r,
            Err(ureq::Error::StatusCode(404)) => return Ok(false),
            Err(e) => return Err(Error::Backend(format!("{url}: {e}"))),
        };
        let target = dest.join(name);
        let tmp = dest.join(format!(".{name}.part"));
        let write = || -> io::Result<()> {
            let mut file = fs::File::create(&tmp)?;
            io::copy(&mut response.into_body().into_reader(), &mut file)?;
            file.sync_all()?;
            fs::rename(&tmp, &target)
        };
        write().map_err(|e| Error::Backend(format!("{url}: {e}")))?;
        Ok(true)
    }
}

fn is_checkpoint_dir(dir: &Path) -> bool {
    dir.join("config.json").is_file() && (dir.join(SAFETENSORS_FILE).is_file() || dir.join(PYTORCH_FILE).is_file())
}

fn looks_like_repo(id: &str) -> bool {
    let mut parts = id.split('/');
    let ok = |s: Option<&str>| {
        s.is_some_and(|s| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)))
    };
    ok(parts.next()) && ok(parts.next()) && parts.next().is_none()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repo_ids() {
        assert!(looks_like_repo("vinai/bertweet-covid19-base-uncased"));
        assert!(looks_like_repo("cardiffnlp/twitter-roberta-base-hate"));
        assert!(!looks_like_repo("toy"));
        assert!(!looks_like_repo("a/b/c"));
        assert!(!looks_like_repo("/abs"));
    }

    #[test]
    fn offline_miss_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let hub = Hub {
            cache_dir: dir.path().to_path_buf(),
            endpoint: "http://127.0.0.1:9".into(),
            offline: true,
        };
        let err = hub.resolve("someone/model").unwrap_err().to_string();
        assert!(err.contains("downloads are disabled"), "{err}");
        assert!(matches!(hub.resolve("plainname"), Err(Error::UnknownBackend(_))));
    }

    #[test]
    fn cache_layout() {
        let hub = Hub {
            cache_dir: PathBuf::from("/c"),
            endpoint: DEFAULT_ENDPOINT.into(),
            offline: false,
        };
        assert_eq!(hub.cache_path("a/b"), PathBuf::from("/c/a--b"));
    }
}
