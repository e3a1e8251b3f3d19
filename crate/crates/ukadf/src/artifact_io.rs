use std::fs;
use std::io::Write;
use std::path::Path;

use ukadf_core::artifact::{ArtifactMetadata, PretrainedArtifact};
use ukadf_core::models::PretrainNet;

use crate::{Error, Result};

/// Writes `bytes` to a temporary sibling of `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Saves an artifact and returns its hex checksum.
pub fn save_artifact(artifact: &PretrainedArtifact, path: &Path) -> Result<String> {
    write_atomic(path, &artifact.to_bytes())?;
    Ok(artifact.checksum_hex())
}

/// Extracts and saves the recurrent cell of `net`.
pub fn save_net(net: &PretrainNet, metadata: ArtifactMetadata, path: &Path) -> Result<String> {
    save_artifact(&PretrainedArtifact::from_net(net, metadata)?, path)
}

/// Loads and verifies an artifact.
pub fn load_artifact(path: &Path) -> Result<PretrainedArtifact> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(PretrainedArtifact::from_bytes(&bytes)?)
}
