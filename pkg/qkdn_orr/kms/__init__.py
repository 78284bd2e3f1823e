from qkdn_orr.kms.client import HttpKmsClient, InProcessKmsClient, KmsClient
from qkdn_orr.kms.store import KEY_SIZE_BITS, KeyManagementService, LinkStore, QkdKey

__all__ = [
    "HttpKmsClient",
    "InProcessKmsClient",
    "KEY_SIZE_BITS",
    "KeyManagementService",
    "KmsClient",
    "LinkStore",
    "QkdKey",
]
