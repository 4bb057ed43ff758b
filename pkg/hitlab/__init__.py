# Hitting-time lab package
