//! Error body `{"error": <code>, "message": <text>}` and status mapping.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use cliox_core::catalog::CatalogError;
use cliox_core::ledger::LedgerError;
use cliox_core::market::MarketError;
use cliox_core::provider::ProviderError;
use cliox_core::runtime::RuntimeError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError { status, code: code.into(), message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "Unauthenticated", "a valid session token is required")
    }

    pub fn forbidden(message: impl Into<String>) -> Self {
        Self::new(StatusCode::FORBIDDEN, "Forbidden", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NotFound", message)
    }

    fn internal() -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", "internal error")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.code, message: self.message })).into_response()
    }
}

impl From<LedgerError> for ApiError {
    fn from(e: LedgerError) -> Self {
        let message = e.to_string();
        let (status, code) = match e {
            LedgerError::InsufficientFunds { .. } => (StatusCode::PAYMENT_REQUIRED, "InsufficientFunds"),
            LedgerError::UnknownIdentity(_) => (StatusCode::NOT_FOUND, "UnknownIdentity"),
            LedgerError::UnknownNft(_) => (StatusCode::NOT_FOUND, "UnknownNft"),
            LedgerError::UnknownOrder(_) => (StatusCode::NOT_FOUND, "UnknownOrder"),
            LedgerError::UnknownGrant(_) => (StatusCode::NOT_FOUND, "UnknownGrant"),
            LedgerError::DuplicateAsset(_) => (StatusCode::CONFLICT, "DuplicateAsset"),
            LedgerError::DuplicateIdentity(_) => (StatusCode::CONFLICT, "DuplicateIdentity"),
            LedgerError::DuplicateTokenClass(_) => (StatusCode::CONFLICT, "DuplicateTokenClass"),
            LedgerError::NotLocked(_) => (StatusCode::CONFLICT, "NotLocked"),
            LedgerError::NotOwner => (StatusCode::FORBIDDEN, "NotOwner"),
            LedgerError::BadSignature => (StatusCode::FORBIDDEN, "BadSignature"),
            LedgerError::StaleNonce { .. } => (StatusCode::CONFLICT, "StaleNonce"),
            LedgerError::ZeroAmount => (StatusCode::BAD_REQUEST, "ZeroAmount"),
            LedgerError::EmptyRoles => (StatusCode::BAD_REQUEST, "EmptyRoles"),
            LedgerError::BadSplit => (StatusCode::BAD_REQUEST, "BadSplit"),
            LedgerError::Audit(_) => return Self::internal(),
        };
        Self::new(status, code, message)
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        let message = e.to_string();
        let (status, code) = match e {
            CatalogError::Ledger(inner) => return inner.into(),
            CatalogError::NotFound(_) => (StatusCode::NOT_FOUND, "UnknownAsset"),
            CatalogError::DuplicateDid(_) | CatalogError::DuplicateName(_) => (StatusCode::CONFLICT, "DuplicateAsset"),
            CatalogError::Retired(_) => (StatusCode::CONFLICT, "AssetRetired"),
            CatalogError::NotOwner => (StatusCode::FORBIDDEN, "NotOwner"),
            CatalogError::LocationInMetadata => (StatusCode::BAD_REQUEST, "LocationInMetadata"),
            CatalogError::BadSignature => (StatusCode::BAD_REQUEST, "BadSignature"),
            CatalogError::MissingLocator => (StatusCode::BAD_REQUEST, "MissingLocation"),
            CatalogError::DidMismatch => (StatusCode::BAD_REQUEST, "DidMismatch"),
            CatalogError::LicenseDigestMismatch => (StatusCode::BAD_REQUEST, "LicenseDigestMismatch"),
            CatalogError::UnknownAuthor(_) => (StatusCode::BAD_REQUEST, "UnknownAuthor"),
        };
        Self::new(status, code, message)
    }
}

impl From<ProviderError> for ApiError {
    fn from(e: ProviderError) -> Self {
        let message = e.to_string();
        let (status, code) = match e {
            ProviderError::Ledger(inner) => return inner.into(),
            ProviderError::NotFound(_) => (StatusCode::NOT_FOUND, "UnknownAsset"),
            ProviderError::DigestMismatch => (StatusCode::CONFLICT, "LicenseDigestMismatch"),
            ProviderError::BadSignature => (StatusCode::FORBIDDEN, "BadSignature"),
            ProviderError::EmptyLocation => (StatusCode::BAD_REQUEST, "MissingLocation"),
            _ => return Self::internal(),
        };
        Self::new(status, code, message)
    }
}

impl From<MarketError> for ApiError {
    fn from(e: MarketError) -> Self {
        let message = e.to_string();
        let (status, code) = match e {
            MarketError::Catalog(inner) => return inner.into(),
            MarketError::Ledger(inner) => return inner.into(),
            MarketError::Provider(inner) => return inner.into(),
            MarketError::Forbidden(_) => (StatusCode::FORBIDDEN, "Forbidden"),
            MarketError::MissingLocation => (StatusCode::BAD_REQUEST, "MissingLocation"),
            MarketError::LocationInMetadata => (StatusCode::BAD_REQUEST, "LocationInMetadata"),
            MarketError::UnknownAsset(_) => (StatusCode::NOT_FOUND, "UnknownAsset"),
            MarketError::AssetRetired(_) => (StatusCode::CONFLICT, "AssetRetired"),
            MarketError::WrongAssetType(_) => (StatusCode::BAD_REQUEST, "WrongAssetType"),
            MarketError::ConsentMissing(_) => (StatusCode::CONFLICT, "ConsentMissing"),
            MarketError::BadSplit => (StatusCode::BAD_REQUEST, "BadSplit"),
        };
        Self::new(status, code, message)
    }
}

impl From<RuntimeError> for ApiError {
    fn from(e: RuntimeError) -> Self {
        let message = e.to_string();
        let (status, code) = match e {
            RuntimeError::Ledger(inner) => return inner.into(),
            RuntimeError::UnknownAsset(_) => (StatusCode::NOT_FOUND, "UnknownAsset"),
            RuntimeError::UnknownJob(_) => (StatusCode::NOT_FOUND, "UnknownJob"),
            RuntimeError::AssetRetired(_) => (StatusCode::CONFLICT, "AssetRetired"),
            RuntimeError::WrongAssetType(_) => (StatusCode::BAD_REQUEST, "WrongAssetType"),
            RuntimeError::MissingSeed => (StatusCode::BAD_REQUEST, "MissingSeed"),
            RuntimeError::InvalidSeed => (StatusCode::BAD_REQUEST, "InvalidSeed"),
            RuntimeError::NotYourJob => (StatusCode::FORBIDDEN, "NotYourJob"),
            RuntimeError::NotFinished => (StatusCode::CONFLICT, "NotFinished"),
            RuntimeError::NoResult(_) => (StatusCode::CONFLICT, "NoResult"),
            RuntimeError::IllegalTransition { .. } => (StatusCode::CONFLICT, "IllegalTransition"),
            RuntimeError::ResultStore(_) | RuntimeError::Provider(_) => return Self::internal(),
        };
        Self::new(status, code, message)
    }
}
