import os

os.environ.update(
    {
        "PDMM_LOG_LEVEL": "WARNING",
        "PDMM_WORKERS": "1",
    }
)
