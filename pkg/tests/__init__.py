# Test package init - tests are discovered automatically by pytest
