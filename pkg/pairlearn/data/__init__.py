"""Matrix files, bundles and reports."""
