# Settings, logging, typed errors and unit conversion
