# lexicon.py
# Modal-verb triggers for each deontic type, as listed in the regulation
# taxonomy. Phrases are lowercase; multi-word phrases match as a unit.

DEONTIC_TYPES = ['Permission', 'Prohibition', 'Obligation', 'Entitlement']

DEONTIC_TRIGGERS = {
    'Obligation': [
        'shall be required', 'will be required', 'shall be obligated', 'shall',
        'must', 'will', 'have to', 'should', 'ought to have', 'will be paid',
        'shall be paid', 'agree', 'agrees', 'acknowledges', 'acknowledge',
        'represents and warrants', 'shall be responsible for',
        'will be responsible for',
    ],
    'Prohibition': [
        'shall not', 'will not', 'must not', 'may not', 'cannot',
        'shall have no right', 'can not', 'shall not be allowed',
        'will not be allowed', 'shall not assist', 'shall be prohibited',
        'will be prohibited', 'nor shall', 'not to be',
        'neither lessor nore lessee may', 'in no event shall', 'nor will',
        'will not allow', 'nor may',
    ],
    'Permission': [
        'shall be permitted', 'shall also be permitted', 'can', 'may', 'could',
        'shall be allowed', 'will be allowed', 'is permitted', 'will allow',
        'has the right', "or at landlord's option", 'shall be permitted to',
    ],
    # No entitlement triggers are published; user lexicon files may add some
    'Entitlement': [],
}

# Rule types that make a matched attribute high risk
RESTRICTIVE_TYPES = {'Prohibition', 'Obligation'}
PERMISSIVE_TYPES = {'Permission', 'Entitlement'}
