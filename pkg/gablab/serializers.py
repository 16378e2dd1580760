from rest_framework import serializers

from .conf import gablab_settings
from .density import validate_theta_grid
from .exceptions import GablabError
from .group import Side, enumerate_subgroups, group_to_json, make_group, span_subgroup
from .rdual import array_digest
from .runner import DEFAULT_PARSEVAL_BASE, Experiment, Task, WindowKind


# ============================================
# FIELDS
# ============================================

class ComplexField(serializers.Field):
    """
    A complex number as [re, im].
    """

    def to_representation(self, value):
        value = complex(value)
        return [value.real, value.imag]

    def to_internal_value(self, data):
        if not isinstance(data, (list, tuple)) or len(data) != 2:
            raise serializers.ValidationError('A complex value must be a [re, im] pair.')
        try:
            return complex(float(data[0]), float(data[1]))
        except (TypeError, ValueError):
            raise serializers.ValidationError('Both parts of a complex value must be numbers.')


class MatrixField(serializers.Field):
    """
    A complex matrix as rows of [re, im] pairs, or as its SHA-256 digest
    when the serializer context asks for hashes only.
    """

    def __init__(self, **kwargs):
        kwargs['read_only'] = True
        super().__init__(**kwargs)

    def to_representation(self, value):
        if self.context.get('hashes_only'):
            return {'sha256': array_digest(value), 'shape': list(value.shape)}
        return [[[entry.real, entry.imag] for entry in row.tolist()] for row in value]


class LabelField(serializers.Field):
    """A basis label: a lattice point (alpha, beta) or ("filler", k)."""

    def to_representation(self, value):
        return list(value)


class LatticeField(serializers.Field):
    """
    Either the string "all" or a list of generators, each a list of residues.
    """
    default_error_messages = {
        'invalid': 'Expected "all" or a list of generators (lists of integers).',
    }

    def to_representation(self, value):
        return value

    def to_internal_value(self, data):
        if data == 'all':
            return data
        if not isinstance(data, list):
            self.fail('invalid')
        generators = []
        for generator in data:
            if isinstance(generator, int) and not isinstance(generator, bool):
                generator = [generator]
            if not isinstance(generator, list) or not all(
                isinstance(r, int) and not isinstance(r, bool) for r in generator
            ):
                self.fail('invalid')
            generators.append(generator)
        return generators


# ============================================
# EXPERIMENT SPEC
# ============================================

class WindowSpecSerializer(serializers.Serializer):
    """
    Window descriptor: delta, random(seed), values, or canonical_parseval(base).
    """
    kind = serializers.ChoiceField(choices=WindowKind.choices)
    seed = serializers.IntegerField(required=False, min_value=0)
    values = serializers.ListField(child=ComplexField(), required=False)
    base = serializers.DictField(required=False)

    def validate(self, attrs):
        kind = attrs['kind']

        if kind == WindowKind.RANDOM and 'seed' not in attrs:
            raise serializers.ValidationError({'seed': 'A random window needs a seed.'})

        if kind == WindowKind.VALUES and 'values' not in attrs:
            raise serializers.ValidationError({'values': 'A values window needs its values.'})

        if kind == WindowKind.CANONICAL_PARSEVAL:
            base = WindowSpecSerializer(data=attrs.get('base') or DEFAULT_PARSEVAL_BASE)
            if not base.is_valid():
                raise serializers.ValidationError({'base': base.errors})
            if base.validated_data['kind'] == WindowKind.CANONICAL_PARSEVAL:
                raise serializers.ValidationError({'base': 'The base window cannot itself be tightened.'})
            attrs['base'] = window_descriptor(base.validated_data)

        return attrs


def window_descriptor(window):
    """Validated window data as a plain JSON descriptor."""
    data = dict(window)
    if 'values' in data:
        data['values'] = [[v.real, v.imag] for v in data['values']]
    return data


class ExperimentSpecSerializer(serializers.Serializer):
    """
    A batch of verification tasks over one group, one window and lattice pairs.
    """
    group = serializers.ListField(child=serializers.IntegerField())
    window = WindowSpecSerializer()
    timeLattice = LatticeField()
    freqLattice = LatticeField()
    tasks = serializers.ListField(
        child=serializers.ChoiceField(choices=Task.choices), allow_empty=False
    )
    thetaGrid = serializers.ListField(child=serializers.FloatField(), required=False)
    tol = serializers.FloatField(required=False)

    def validate_group(self, value):
        """Build the group, enforcing the order cap."""
        try:
            return make_group(value)
        except GablabError as exc:
            raise serializers.ValidationError(str(exc))

    def validate_thetaGrid(self, value):
        try:
            return validate_theta_grid(value)
        except GablabError as exc:
            raise serializers.ValidationError(str(exc))

    def validate_tol(self, value):
        if value <= 0:
            raise serializers.ValidationError('Tolerance must be positive.')
        return value

    def _lattices(self, group, value, side, field):
        try:
            if value == 'all':
                return enumerate_subgroups(group, side)
            return [span_subgroup(group, side, value)]
        except GablabError as exc:
            raise serializers.ValidationError({field: str(exc)})

    def validate(self, attrs):
        """
        Cross-field validation.
        - lattice generators must belong to the group
        - explicit window values must have one entry per group element
        """
        group = attrs['group']
        window = attrs['window']

        for values in (window.get('values'), (window.get('base') or {}).get('values')):
            if values is not None and len(values) != group.order:
                raise serializers.ValidationError({
                    'window': f"Expected {group.order} window values, got {len(values)}."
                })

        attrs['time_lattices'] = self._lattices(group, attrs['timeLattice'], Side.PRIMAL, 'timeLattice')
        attrs['freq_lattices'] = self._lattices(group, attrs['freqLattice'], Side.DUAL, 'freqLattice')
        attrs['window_descriptor'] = window_descriptor(attrs['window'])
        return attrs

    def to_experiment(self):
        data = self.validated_data
        return Experiment(
            group=data['group'],
            window=data['window_descriptor'],
            time_lattices=data['time_lattices'],
            freq_lattices=data['freq_lattices'],
            tasks=list(dict.fromkeys(data['tasks'])),
            tol=data.get('tol', gablab_settings.DEFAULT_TOL),
            theta_grid=data.get('thetaGrid'),
        )


# ============================================
# REPORT SERIALIZERS
# ============================================

class SpectralReportSerializer(serializers.Serializer):
    eigenvalues = serializers.ListField(child=serializers.FloatField())
    rank = serializers.IntegerField()
    A = serializers.FloatField(source='lower')
    B = serializers.FloatField(source='upper')
    isFrame = serializers.BooleanField(source='is_frame')
    isRieszSequence = serializers.BooleanField(source='is_riesz_sequence')
    isTight = serializers.BooleanField(source='is_tight')
    tolerance = serializers.FloatField()


class ExcessDeficitSerializer(serializers.Serializer):
    excess = serializers.IntegerField()
    deficit = serializers.IntegerField()
    rank = serializers.IntegerField()
    atomCount = serializers.IntegerField(source='atom_count')


class DualityVerdictSerializer(serializers.Serializer):
    frame = SpectralReportSerializer()
    riesz = SpectralReportSerializer()
    lowerGap = serializers.FloatField(source='lower_gap')
    upperGap = serializers.FloatField(source='upper_gap')
    holds = serializers.BooleanField()


class TightnessVerdictSerializer(serializers.Serializer):
    frame = SpectralReportSerializer()
    tight = serializers.BooleanField()
    orthogonal = serializers.BooleanField()
    offDiagonal = serializers.FloatField(source='off_diagonal')
    energy = serializers.FloatField()
    boundGap = serializers.FloatField(source='bound_gap')
    holds = serializers.BooleanField()


class BesselVerdictSerializer(serializers.Serializer):
    frameUpper = serializers.FloatField(source='frame_upper')
    rieszUpper = serializers.FloatField(source='riesz_upper')
    gap = serializers.FloatField()
    holds = serializers.BooleanField()


class CriticalResidualSerializer(serializers.Serializer):
    residual = serializers.FloatField()
    scale = serializers.FloatField()
    holds = serializers.BooleanField()


class OrthonormalBasisSerializer(serializers.Serializer):
    labels = serializers.ListField(child=LabelField())
    vectors = MatrixField()


class RDualWitnessSerializer(serializers.Serializer):
    """
    Witness of the R-duality; with context {'hashes_only': True} every
    matrix is replaced by its digest.
    """
    eBasis = OrthonormalBasisSerializer(source='e_basis')
    hBasis = OrthonormalBasisSerializer(source='h_basis')
    wSequence = MatrixField(source='w_sequence')
    unitary = MatrixField()
    complementW = MatrixField(source='complement_w')
    complementAdjoint = MatrixField(source='complement_adjoint')
    ambientDimension = serializers.IntegerField(source='ambient_dimension')
    complementDimension = serializers.IntegerField(source='complement_dimension')
    frameBound = serializers.FloatField(source='frame_bound')
    maxResidual = serializers.FloatField(source='max_residual')
    unitarityDefect = serializers.FloatField(source='unitarity_defect')
    wGramDefect = serializers.FloatField(source='w_gram_defect')
    tolerance = serializers.FloatField()


class ThetaSweepSerializer(serializers.Serializer):
    thetas = serializers.ListField(child=serializers.FloatField())
    innerProducts = serializers.ListField(child=serializers.FloatField(), source='inner_products')
    psiValues = serializers.ListField(child=serializers.FloatField(), source='psi_values')
    identityDefects = serializers.ListField(child=serializers.FloatField(), source='identity_defects')
    decompositionDefects = serializers.ListField(
        child=serializers.FloatField(), source='decomposition_defects'
    )
    dInverse = serializers.SerializerMethodField()
    psiLimit = serializers.FloatField(source='psi_limit')
    limitGap = serializers.FloatField(source='limit_gap')
    limitBound = serializers.FloatField(source='limit_bound')
    complete = serializers.BooleanField()

    def get_dInverse(self, obj):
        """Exact rational, e.g. "2" or "3/4"."""
        return str(obj.d_inverse)


class CompletenessVerdictSerializer(serializers.Serializer):
    complete = serializers.BooleanField()
    rank = serializers.IntegerField()
    atomCount = serializers.IntegerField(source='atom_count')
    latticeSize = serializers.SerializerMethodField()
    countingWitness = serializers.BooleanField(source='counting_witness')
    holds = serializers.BooleanField()

    def get_latticeSize(self, obj):
        return str(obj.lattice_size)


RESULT_SERIALIZERS = {
    Task.DUALITY: DualityVerdictSerializer,
    Task.TIGHT: TightnessVerdictSerializer,
    Task.RDUAL43: CriticalResidualSerializer,
    Task.RDUAL41: RDualWitnessSerializer,
    Task.DENSITY: ThetaSweepSerializer,
    Task.COMPLETENESS: CompletenessVerdictSerializer,
    Task.EXCESS: ExcessDeficitSerializer,
    Task.BESSEL: BesselVerdictSerializer,
}


class CaseSerializer(serializers.Serializer):
    timeLattice = serializers.ListField(source='time_generators')
    freqLattice = serializers.ListField(source='freq_generators')
    window = serializers.DictField()
    task = serializers.CharField()
    status = serializers.CharField()
    reason = serializers.CharField()
    tolerance = serializers.FloatField()
    result = serializers.SerializerMethodField()

    def get_result(self, obj):
        """Task-specific payload, null for skipped cases."""
        if obj.result is None:
            return None
        serializer = RESULT_SERIALIZERS[Task(obj.task)]
        return serializer(obj.result, context=self.context).data


class ReportSerializer(serializers.Serializer):
    """
    The versioned JSON report of one experiment.
    """
    schemaVersion = serializers.IntegerField(source='schema_version')
    timestamp = serializers.CharField()
    group = serializers.SerializerMethodField()
    cases = CaseSerializer(many=True)
    summary = serializers.DictField(child=serializers.IntegerField())

    def get_group(self, obj):
        return group_to_json(obj.group)
