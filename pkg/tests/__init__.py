# Tests for edgeroute
