# coding: utf-8

# Configuration file
config = {
    'flags': ('--config', '-c'),
    'parameters': {
        'action':   'store',
        'dest':     'config_path',
        'default':  None,
        'help':     'Configuration file path',
    }
}


# Random seed
seed = {
    'flags': ('--seed', '-s'),
    'parameters': {
        'action':   'store',
        'dest':     'seed',
        'type':     int,
        'default':  None,
        'help':     'Random seed, overrides the value given in config.yaml',
    }
}


# Output directory
out = {
    'flags': ('--out', '-o'),
    'parameters': {
        'action':   'store',
        'dest':     'output',
        'default':  None,
        'help':     'Output directory, overrides the value given in \
                     config.yaml',
    }
}


# Items file
data_items = {
    'flags': ('--data-items',),
    'parameters': {
        'action':   'store',
        'dest':     'data_items',
        'default':  None,
        'help':     'Line-delimited JSON items file',
    }
}


# Interactions file
data_interactions = {
    'flags': ('--data-interactions',),
    'parameters': {
        'action':   'store',
        'dest':     'data_interactions',
        'default':  None,
        'help':     'Line-delimited JSON interactions file',
    }
}


# Model variant
variant = {
    'flags': ('--variant', '-v'),
    'parameters': {
        'action':   'store',
        'dest':     'variant',
        'default':  None,
        'help':     'Model variant: full, no_mfl, no_sal or full_attention',
    }
}


# Checkpoint file
checkpoint = {
    'flags': ('--checkpoint',),
    'parameters': {
        'action':   'store',
        'dest':     'checkpoint',
        'default':  None,
        'help':     'Checkpoint file, default is checkpoint.npz in the \
                     output directory',
    }
}


# Gradient corruption test hook
corrupt = {
    'flags': ('--corrupt',),
    'parameters': {
        'action':   'store',
        'dest':     'corrupt',
        'default':  None,
        'help':     'Deliberately scale the analytic gradient of one \
                     component (checker self-test)',
    }
}


common = [config, seed, out, data_items, data_interactions, variant]
