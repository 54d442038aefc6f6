"""Binary linear codes over GF(2), CSS pairs and the code catalog."""
