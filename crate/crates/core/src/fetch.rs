//! Plain HTTP(S) retrieval of caption files.

use std::time::Duration;

use thiserror::Error;

/// Largest caption body accepted.
const MAX_BODY_BYTES: u64 = 64 * 1024 * 1024;
const MAX_REDIRECTS: u32 = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FetchError {
    #[error("HTTP status {0}")]
    Http(u16),
    #[error("request timed out")]
    Timeout,
    #[error("more than {MAX_REDIRECTS} redirects")]
    TooManyRedirects,
    #[error("unsupported url `{0}` (expected http or https)")]
    InvalidUrl(String),
    #[error("transport error: {0}")]
    Transport(String),
}

/// GETs `url` and returns the body of a 200 response. Follows at most five redirects.
pub fn fetch_captions(url: &str, timeout_ms: u64) -> Result<Vec<u8>, FetchError> {
    if !(url.starts_with("http://") || url.starts_with("https://")) {
        return Err(FetchError::InvalidUrl(url.to_string()));
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_millis(timeout_ms)))
        .max_redirects(MAX_REDIRECTS)
        .max_redirects_will_error(true)
        .http_status_as_error(false)
        .build()
        .into();
    let mut response = agent.get(url).call().map_err(map_error)?;
    let status = response.status().as_u16();
    if status != 200 {
        return Err(FetchError::Http(status));
    }
    response
        .body_mut()
        .with_config()
        .limit(MAX_BODY_BYTES)
        .read_to_vec()
        .map_err(map_error)
}

fn map_error(err: ureq::Error) -> FetchError {
    match err {
        ureq::Error::StatusCode(code) => FetchError::Http(code),
        ureq::Error::Timeout(_) => FetchError::Timeout,
        ureq::Error::Io(e)
            if matches!(
                e.kind(),
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
            ) =>
        {
            FetchError::Timeout
        }
        ureq::Error::TooManyRedirects => FetchError::TooManyRedirects,
        ureq::Error::BadUri(uri) => FetchError::InvalidUrl(uri),
        other => FetchError::Transport(other.to_string()),
    }
}
